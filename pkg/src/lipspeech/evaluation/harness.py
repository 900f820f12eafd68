"""Corpus evaluation and the vocoder throughput harness.

The transcription protocol needs no manual labels: the same external
recognizer transcribes the real and the generated audio, and the
corpus word error rate of generated-vs-real transcriptions measures
how much intelligibility the synthesis lost.
"""

from __future__ import annotations

import os
import platform
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core.io import read_video_tensor, read_embedding, read_wav, write_wav
from ..core.manifest import load_manifest, split_entries
from ..core.types import MelSpectrogram, VideoClip, Waveform
from ..preprocess.crop import center_crop
from ..training.loop import load_predictor
from .adapters import AdapterError, AsrAdapter, PesqAdapter
from .intelligibility import estoi, stoi
from .wer import corpus_wer, tokenize


@dataclass
class UtteranceRow:
    id: str
    stoi: float
    estoi: float
    pesq: float | None = None
    wer_errors: int | None = None
    ref_words: int | None = None
    error: str | None = None

    def to_line(self) -> str:
        def fmt(x):
            return "-" if x is None else (f"{x:.6f}" if isinstance(x, float) else str(x))
        status = self.error if self.error else "ok"
        return "\t".join([self.id, fmt(self.stoi), fmt(self.estoi), fmt(self.pesq),
                          fmt(self.wer_errors), fmt(self.ref_words), status])


@dataclass
class MetricReport:
    stoi: float
    estoi: float
    pesq: float | None
    wer: float | None
    per_utterance: list[UtteranceRow] = field(default_factory=list)
    pesq_excluded: int = 0
    asr_excluded: int = 0

    def table(self) -> str:
        def fmt(x, pat="{:.4f}"):
            return "-" if x is None else pat.format(x)
        lines = [
            f"{'metric':<8}{'value':>10}",
            f"{'stoi':<8}{fmt(self.stoi):>10}",
            f"{'estoi':<8}{fmt(self.estoi):>10}",
            f"{'pesq':<8}{fmt(self.pesq):>10}",
            f"{'wer':<8}{fmt(self.wer):>10}",
            f"utterances: {len(self.per_utterance)}"
            f" (pesq excluded: {self.pesq_excluded}, asr excluded: {self.asr_excluded})",
        ]
        return "\n".join(lines)


@dataclass
class WerProtocolResult:
    wer: float | None
    errors: int
    ref_words: int
    excluded: int
    per_utterance: list[tuple[int, int] | None] = field(default_factory=list)


@dataclass
class VocoderBenchmark:
    clips_per_second: float
    num_clips: int
    elapsed_s: float
    adapter: str
    hardware: str

    def to_line(self) -> str:
        return (f"adapter={self.adapter}\tclips={self.num_clips}"
                f"\telapsed_s={self.elapsed_s:.3f}"
                f"\tclips_per_second={self.clips_per_second:.3f}"
                f"\thardware={self.hardware}")


def hardware_description() -> str:
    cpu = platform.processor() or platform.machine()
    return f"{platform.system()} {platform.machine()} ({cpu}), {os.cpu_count()} cpus"


def wer_protocol(real_wavs: list, generated_wavs: list,
                 asr_adapter: AsrAdapter) -> WerProtocolResult:
    """Corpus WER of generated-vs-real transcriptions from the same ASR.

    Inputs are paired lists of WAV paths. Utterances where the adapter
    fails (or yields an empty reference transcript) are excluded and
    counted.
    """
    if len(real_wavs) != len(generated_wavs):
        raise ValueError("real and generated lists must pair up")
    pairs = []
    per_utterance: list[tuple[int, int] | None] = []
    excluded = 0
    for real, gen in zip(real_wavs, generated_wavs):
        try:
            ref = tokenize(asr_adapter.transcribe(real))
            hyp = tokenize(asr_adapter.transcribe(gen))
            if not ref:
                raise AdapterError(f"empty reference transcript for {real}")
        except AdapterError:
            excluded += 1
            per_utterance.append(None)
            continue
        pairs.append((ref, hyp))
        per_utterance.append((len(ref), len(hyp)))
    if not pairs:
        return WerProtocolResult(None, 0, 0, excluded, per_utterance)
    rate, errors, words = corpus_wer(pairs)
    return WerProtocolResult(rate, errors, words, excluded, per_utterance)


def benchmark_vocoder(adapter, mel_clips: list[MelSpectrogram],
                      min_clips: int = 10) -> VocoderBenchmark:
    """Wall-clock synthesis throughput, warmup run excluded."""
    if len(mel_clips) < min_clips:
        raise ValueError(f"need >= {min_clips} clips for stable timing, got {len(mel_clips)}")
    adapter.synthesize(mel_clips[0])  # warmup
    start = time.perf_counter()
    for mel in mel_clips:
        adapter.synthesize(mel)
    elapsed = time.perf_counter() - start
    return VocoderBenchmark(
        clips_per_second=len(mel_clips) / elapsed,
        num_clips=len(mel_clips),
        elapsed_s=elapsed,
        adapter=adapter.describe() if hasattr(adapter, "describe") else str(adapter),
        hardware=hardware_description())


def _truncate_pair(a: Waveform, b: Waveform) -> tuple[Waveform, Waveform]:
    n = min(a.num_samples, b.num_samples)
    return Waveform(a.samples[:n]), Waveform(b.samples[:n])


def evaluate_corpus(manifest_path, checkpoint_path, vocoder,
                    pesq_adapter: PesqAdapter | None = None,
                    asr_adapter: AsrAdapter | None = None,
                    out_dir=None, split: str = "test") -> MetricReport:
    """Predict, synthesize and score every utterance in the chosen split.

    The manifest must be preprocessed (video paths are 96x96 clip
    tensors). Missing adapters simply omit their metric. Per-utterance
    rows plus a summary are written to out_dir/report.tsv; generated and
    reference WAVs land in out_dir/wavs/.
    """
    manifest_path = Path(manifest_path)
    entries = [e.resolve(manifest_path.parent)
               for e in load_manifest(manifest_path)]
    entries = split_entries(entries, split)
    if not entries:
        raise ValueError(f"manifest has no {split} entries")

    model, _ = load_predictor(checkpoint_path)

    tmp_holder = None
    if out_dir is None:
        tmp_holder = tempfile.TemporaryDirectory(prefix="evaluate_")
        out_dir = tmp_holder.name
    out = Path(out_dir)
    wav_dir = out / "wavs"
    wav_dir.mkdir(parents=True, exist_ok=True)

    rows: list[UtteranceRow] = []
    real_paths, gen_paths = [], []
    pesq_excluded = 0
    try:
        for entry in entries:
            clip = VideoClip(read_video_tensor(entry.video_path))
            emb = read_embedding(entry.speaker_embedding_path, entry.speaker_id)
            mel = model.predict(center_crop(clip), emb)
            generated = vocoder.synthesize(mel)
            reference = read_wav(entry.audio_path)
            ref_t, gen_t = _truncate_pair(reference, generated)

            ref_path = wav_dir / f"{entry.id}_ref.wav"
            gen_path = wav_dir / f"{entry.id}_gen.wav"
            write_wav(ref_path, ref_t)
            write_wav(gen_path, gen_t)
            real_paths.append(ref_path)
            gen_paths.append(gen_path)

            row = UtteranceRow(id=entry.id, stoi=stoi(ref_t, gen_t),
                               estoi=estoi(ref_t, gen_t))
            if pesq_adapter is not None:
                try:
                    row.pesq = pesq_adapter.score(ref_path, gen_path)
                except AdapterError as exc:
                    row.error = f"pesq: {exc}"
                    pesq_excluded += 1
            rows.append(row)

        wer_value = None
        asr_excluded = 0
        if asr_adapter is not None:
            protocol = wer_protocol(real_paths, gen_paths, asr_adapter)
            wer_value = protocol.wer
            asr_excluded = protocol.excluded
            for row, detail in zip(rows, protocol.per_utterance):
                if detail is None:
                    row.error = ((row.error + "; ") if row.error else "") + "asr failed"

        pesq_scores = [r.pesq for r in rows if r.pesq is not None]
        report = MetricReport(
            stoi=float(np.mean([r.stoi for r in rows])),
            estoi=float(np.mean([r.estoi for r in rows])),
            pesq=float(np.mean(pesq_scores)) if pesq_scores else None,
            wer=wer_value,
            per_utterance=rows,
            pesq_excluded=pesq_excluded,
            asr_excluded=asr_excluded)

        header = "id\tstoi\testoi\tpesq\twer_errors\tref_words\tstatus"
        summary = (f"#summary\tstoi={report.stoi:.6f}\testoi={report.estoi:.6f}"
                   f"\tpesq={report.pesq if report.pesq is not None else '-'}"
                   f"\twer={report.wer if report.wer is not None else '-'}")
        (out / "report.tsv").write_text(
            "\n".join([header] + [r.to_line() for r in rows] + [summary]) + "\n")
        return report
    finally:
        if tmp_holder is not None:
            tmp_holder.cleanup()
