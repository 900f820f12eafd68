"""Command-line entry points: toy-data, preprocess, split, train, infer,
evaluate, bench-vocoder.

Every command writes a plain-text key/value config snapshot into its
output directory, and exits nonzero iff any error was recorded.
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from dataclasses import replace
from pathlib import Path

log = logging.getLogger("lipspeech")


def _write_snapshot(out_dir: Path, command: str, args: argparse.Namespace) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = [f"command={command}"]
    pairs += [f"{k}={v}" for k, v in sorted(vars(args).items()) if k != "func"]
    (out_dir / f"{command}.config.txt").write_text("\n".join(pairs) + "\n")


def _peek_video_frames(path: Path) -> int:
    if path.is_dir():
        return len([x for x in path.iterdir()
                    if x.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp")])
    with open(path, "rb") as fh:
        parts = fh.readline().split()
    if len(parts) < 3 or parts[0] != b"video":
        raise ValueError(f"{path}: not a video tensor file")
    return int(parts[2])


def cmd_toy_data(args) -> int:
    from .training.toydata import make_toy_dataset

    out = Path(args.out)
    manifest = make_toy_dataset(args.clips, args.duration, args.seed, out,
                                n_speakers=args.speakers,
                                embedding_dim=args.embedding_dim)
    _write_snapshot(out, "toy-data", args)
    print(manifest)
    return 0


def _scan_raw_dirs(raw_dir: Path, landmarks_dir: Path, audio_dir: Path,
                   embedding: str | None):
    from .core.manifest import ManifestEntry
    from .core.types import VIDEO_FPS

    entries = []
    videos = sorted(list(raw_dir.glob("*.vid"))
                    + [d for d in raw_dir.iterdir() if d.is_dir()])
    for video in videos:
        uid = video.stem if video.is_file() else video.name
        frames = _peek_video_frames(video)
        emb = embedding if embedding else str(raw_dir / f"{uid}.emb")
        entries.append(ManifestEntry(
            id=uid, video_path=str(video),
            audio_path=str(audio_dir / f"{uid}.wav"),
            landmarks_path=str(landmarks_dir / f"{uid}.lmk"),
            speaker_embedding_path=emb,
            speaker_id=uid.split("_")[0],
            split="train", duration_s=max(frames, 1) / VIDEO_FPS))
    return entries


def cmd_preprocess(args) -> int:
    from .core.manifest import load_manifest
    from .preprocess.pipeline import preprocess_corpus

    out = Path(args.out)
    if args.manifest:
        base = Path(args.manifest).parent
        entries = load_manifest(args.manifest, check_paths=False)
    else:
        if not (args.raw_dir and args.landmarks_dir):
            print("preprocess needs --manifest or --raw-dir + --landmarks-dir",
                  file=sys.stderr)
            return 2
        base = Path(".")
        audio_dir = Path(args.audio_dir) if args.audio_dir else Path(args.raw_dir)
        entries = _scan_raw_dirs(Path(args.raw_dir), Path(args.landmarks_dir),
                                 audio_dir, args.embedding)
    manifest_path, failures = preprocess_corpus(entries, base, out,
                                                args.smoothing_window)
    _write_snapshot(out, "preprocess", args)
    for uid, reason in failures:
        log.error("failed %s: %s", uid, reason)
    print(manifest_path)
    return 1 if failures else 0


def cmd_split(args) -> int:
    from .core.manifest import load_manifest, make_split, save_manifest

    ratios = tuple(float(x) for x in args.ratios.split(","))
    if len(ratios) != 3:
        print("--ratios must be three comma-separated numbers", file=sys.stderr)
        return 2
    entries = load_manifest(args.manifest, check_paths=False)
    assigned = make_split(entries, args.mode, ratios, args.seed)
    out = Path(args.out) if args.out else Path(args.manifest)
    save_manifest(out, assigned)
    _write_snapshot(out.parent, "split", args)
    print(out)
    return 0


def _model_config(args):
    from .core.config import ModelConfig

    overrides = {}
    if args.speaker_dim is not None:
        overrides["speaker_dim"] = args.speaker_dim
    if args.model == "tiny":
        return ModelConfig.tiny(**overrides)
    if args.encoder_channels is not None:
        overrides["encoder_channels"] = args.encoder_channels
    return ModelConfig.preset(args.model, **overrides)


def cmd_train(args) -> int:
    from .core.config import TRAIN_PRESETS, TrainConfig
    from .training.loop import fit

    cfg = TRAIN_PRESETS[args.preset] if args.preset else TrainConfig()
    updates = {}
    for name in ("peak_lr", "epochs", "batch_size", "loss_mode", "grad_clip_norm",
                 "checkpoint_every", "warmup_fraction"):
        value = getattr(args, name)
        if value is not None:
            updates[name] = value
    if args.no_augment:
        updates["augment"] = False
    if args.time_mask:
        updates["time_mask"] = True
    cfg = replace(cfg, **updates)

    run_dir = Path(args.run_dir) if args.run_dir else Path(args.manifest).parent / "run"
    best = fit(args.manifest, _model_config(args), cfg, args.seed, run_dir)
    _write_snapshot(run_dir, "train", args)
    print(best)
    return 0


def _vocoder_from_args(args):
    from .evaluation.adapters import ExternalVocoder, GriffinLimVocoder

    if args.vocoder == "griffin-lim":
        return GriffinLimVocoder(iterations=args.gl_iterations,
                                 momentum=args.gl_momentum, rng_seed=args.gl_seed)
    if not args.vocoder_cmd:
        raise ValueError("--vocoder external requires --vocoder-cmd")
    return ExternalVocoder(shlex.split(args.vocoder_cmd))


def cmd_infer(args) -> int:
    from .core.io import read_embedding, read_video_tensor, write_wav
    from .core.types import VideoClip
    from .preprocess.crop import center_crop
    from .training.loop import load_predictor

    emb_path = Path(args.embedding)
    if not emb_path.is_file():
        print(f"embedding file not found: {emb_path}", file=sys.stderr)
        return 1
    embedding = read_embedding(emb_path)
    clip = center_crop(VideoClip(read_video_tensor(args.clip)))
    model, _ = load_predictor(args.checkpoint)
    mel = model.predict(clip, embedding)
    wav = _vocoder_from_args(args).synthesize(mel)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_wav(out, wav)
    _write_snapshot(out.parent, "infer", args)
    print(out)
    return 0


def cmd_evaluate(args) -> int:
    from .evaluation.adapters import AsrAdapter, PesqAdapter
    from .evaluation.harness import evaluate_corpus

    pesq = PesqAdapter(shlex.split(args.pesq)) if args.pesq else None
    asr = AsrAdapter(shlex.split(args.asr)) if args.asr else None
    out = Path(args.out)
    report = evaluate_corpus(args.manifest, args.checkpoint,
                             _vocoder_from_args(args), pesq, asr, out,
                             split=args.split)
    _write_snapshot(out, "evaluate", args)
    print(report.table())
    return 0


def cmd_bench_vocoder(args) -> int:
    from .core.io import read_spectrogram
    from .core.types import MelSpectrogram
    from .evaluation.harness import benchmark_vocoder

    mel_files = sorted(Path(args.mels).glob("*.mel"))
    mels = [MelSpectrogram(read_spectrogram(p)) for p in mel_files]
    result = benchmark_vocoder(_vocoder_from_args(args), mels)
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.tsv").write_text(result.to_line() + "\n")
        _write_snapshot(out, "bench-vocoder", args)
    print(result.to_line())
    return 0


def _add_vocoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--vocoder", choices=("griffin-lim", "external"),
                   default="griffin-lim")
    p.add_argument("--vocoder-cmd", help="external vocoder command "
                   "(invoked as: cmd <mel-file> <out-wav>)")
    p.add_argument("--gl-iterations", type=int, default=30)
    p.add_argument("--gl-momentum", type=float, default=0.99)
    p.add_argument("--gl-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipspeech",
                                     description="video-to-speech pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy-data", help="generate a synthetic paired corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--clips", type=int, default=8)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speakers", type=int, default=2)
    p.add_argument("--embedding-dim", type=int, default=256)
    p.set_defaults(func=cmd_toy_data)

    p = sub.add_parser("preprocess", help="crop mouths and extract mels")
    p.add_argument("--manifest")
    p.add_argument("--raw-dir")
    p.add_argument("--landmarks-dir")
    p.add_argument("--audio-dir")
    p.add_argument("--embedding", help="shared speaker-embedding file for raw scans")
    p.add_argument("--out", required=True)
    p.add_argument("--smoothing-window", type=int, default=12)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("split", help="assign train/val/test splits")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("seen", "unseen"), required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="defaults to rewriting the input manifest")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a predictor")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", choices=("S", "M", "L", "tiny"), default="S")
    p.add_argument("--preset", choices=("grid-seen", "grid-unseen", "lrw",
                                        "lrs3-seen", "lrs3-unseen", "lrs3-voxceleb2"))
    p.add_argument("--peak-lr", dest="peak_lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--loss", dest="loss_mode",
                   choices=("l1_only", "sc_only", "combined"))
    p.add_argument("--warmup-fraction", dest="warmup_fraction", type=float)
    p.add_argument("--grad-clip", dest="grad_clip_norm", type=float)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--time-mask", action="store_true")
    p.add_argument("--speaker-dim", type=int)
    p.add_argument("--encoder-channels", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--run-dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="synthesize speech for one clip")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--clip", required=True, help="96x96 clip tensor file")
    p.add_argument("--embedding", required=True)
    p.add_argument("--out", required=True)
    _add_vocoder_flags(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="score a checkpoint on a test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--asr", help="ASR command (invoked as: cmd <wav>)")
    p.add_argument("--pesq", help="PESQ command (invoked as: cmd <ref> <deg>)")
    _add_vocoder_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench-vocoder", help="measure synthesis throughput")
    p.add_argument("--mels", required=True, help="directory of .mel files")
    p.add_argument("--out")
    _add_vocoder_flags(p)
    p.set_defaults(func=cmd_bench_vocoder)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
