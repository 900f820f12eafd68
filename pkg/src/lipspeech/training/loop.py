"""The optimization loop: batching, scheduling, checkpoints, metrics.

Batches group clips of similar duration (sorted, then chunked) and pad
to the longest clip; the loss is masked over padding. All randomness
(batch order, augmentation) is derived per epoch and entry from the run
seed, so a run is reproducible and resumable without carrying mutable
RNG streams across epochs.

Run directory layout: config.txt snapshot, metrics.tsv (step, lr,
train_loss, val_loss), checkpoints/epoch_NNNN.pt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..core.config import ModelConfig, TrainConfig
from ..core.io import read_embedding, read_video_tensor, read_wav
from ..core.manifest import (ManifestEntry, filter_max_duration, load_manifest,
                             split_entries)
from ..core.types import VideoClip
from ..dsp.mel import log_mel
from ..model.losses import combined_loss_t
from ..model.predictor import SpectrogramPredictor
from ..preprocess.augment import AugmentConfig, augment, time_mask
from ..preprocess.crop import center_crop
from .optimizer import AdamW
from .schedule import ScheduleState, lr_at

CHECKPOINT_VERSION = 1


@dataclass
class _Item:
    entry: ManifestEntry
    clip: VideoClip            # stored 96x96 crop
    mel: np.ndarray            # (4T, bands) float32 target
    emb: np.ndarray            # (D,) float32


def _load_item(entry: ManifestEntry) -> _Item:
    frames = read_video_tensor(entry.video_path)
    clip = VideoClip(frames)
    wav = read_wav(entry.audio_path)
    mel = log_mel(wav, num_video_frames=clip.num_frames).values
    emb = read_embedding(entry.speaker_embedding_path, entry.speaker_id).vector
    return _Item(entry, clip, mel, emb)


def _augment_seed(base_seed: int, epoch: int, index: int) -> int:
    return int(np.random.SeedSequence([base_seed, 7, epoch, index]).generate_state(1)[0])


class Trainer:
    def __init__(self, manifest_path, model_cfg: ModelConfig,
                 train_cfg: TrainConfig, rng_seed: int, run_dir):
        manifest_path = Path(manifest_path)
        entries = load_manifest(manifest_path)
        base = manifest_path.parent
        resolved = filter_max_duration([e.resolve(base) for e in entries],
                                       train_cfg.max_duration_s)
        self.train_entries = split_entries(resolved, "train")
        self.val_entries = split_entries(resolved, "val")
        if not self.train_entries:
            raise ValueError("manifest has no train entries after duration filtering")
        if not self.val_entries:
            raise ValueError("manifest has no val entries after duration filtering")

        self.model_cfg = model_cfg
        self.train_cfg = train_cfg
        self.rng_seed = rng_seed
        self.run_dir = Path(run_dir)
        (self.run_dir / "checkpoints").mkdir(parents=True, exist_ok=True)

        self.steps_per_epoch = math.ceil(len(self.train_entries) / train_cfg.batch_size)
        total = train_cfg.epochs * self.steps_per_epoch
        self.schedule = ScheduleState.for_run(total, train_cfg.peak_lr,
                                              train_cfg.warmup_fraction)
        torch.manual_seed(rng_seed)
        self.model = SpectrogramPredictor(model_cfg)
        self.optimizer = AdamW(self.model.named_parameters(), train_cfg.betas,
                               train_cfg.optimizer_eps, train_cfg.weight_decay)
        self.epoch = 0
        self.best_val = float("inf")
        self.best_path: Path | None = None
        self._cache: dict[str, _Item] = {}
        self._metrics_path = self.run_dir / "metrics.tsv"
        if not self._metrics_path.exists():
            self._metrics_path.write_text("step\tlr\ttrain_loss\tval_loss\n")
        self._write_config_snapshot()

    def _write_config_snapshot(self) -> None:
        lines = [f"rng_seed={self.rng_seed}"]
        for prefix, cfg in (("model", self.model_cfg.to_dict()),
                            ("train", self.train_cfg.to_dict())):
            lines += [f"{prefix}.{k}={v}" for k, v in cfg.items()]
        (self.run_dir / "config.txt").write_text("\n".join(lines) + "\n")

    def _item(self, entry: ManifestEntry) -> _Item:
        if entry.id not in self._cache:
            self._cache[entry.id] = _load_item(entry)
        return self._cache[entry.id]

    def _batches(self, entries, epoch: int):
        order = sorted(range(len(entries)), key=lambda i: (entries[i].duration_s,
                                                           entries[i].id))
        size = self.train_cfg.batch_size
        chunks = [order[i:i + size] for i in range(0, len(order), size)]
        rng = np.random.default_rng(np.random.SeedSequence([self.rng_seed, 11, epoch]))
        rng.shuffle(chunks)
        return chunks

    def _prepare(self, item: _Item, epoch: int, index: int, training: bool) -> VideoClip:
        if training and self.train_cfg.augment:
            clip = augment(item.clip, AugmentConfig(),
                           _augment_seed(self.rng_seed, epoch, index))
        else:
            clip = center_crop(item.clip)
        if training and self.train_cfg.time_mask:
            clip = time_mask(clip, rng_seed=_augment_seed(self.rng_seed, -epoch - 1, index))
        return clip

    def _collate(self, items: list[_Item], clips: list[VideoClip]):
        lengths = [c.num_frames for c in clips]
        tmax = max(lengths)
        factor = self.model_cfg.reshape_factor
        bands = self.model_cfg.mel_bands
        frames = torch.zeros(len(items), tmax, clips[0].size, clips[0].size)
        target = torch.zeros(len(items), tmax * factor, bands)
        mask = torch.zeros(len(items), tmax * factor, bands)
        embs = torch.zeros(len(items), items[0].emb.shape[0])
        for i, (item, clip) in enumerate(zip(items, clips)):
            t = lengths[i]
            frames[i, :t] = torch.from_numpy(np.array(clip.frames))
            target[i, :t * factor] = torch.from_numpy(np.array(item.mel))
            mask[i, :t * factor] = 1.0
            embs[i] = torch.from_numpy(np.array(item.emb))
        lengths_t = torch.tensor(lengths)
        same_length = len(set(lengths)) == 1
        return frames, embs, target, (None if same_length else mask), lengths_t

    def train_epoch(self) -> float:
        self.epoch += 1
        cfg = self.train_cfg
        self.model.train()
        epoch_losses = []
        with open(self._metrics_path, "a") as metrics:
            for chunk in self._batches(self.train_entries, self.epoch):
                items = [self._item(self.train_entries[i]) for i in chunk]
                clips = [self._prepare(items[j], self.epoch, chunk[j], True)
                         for j in range(len(chunk))]
                frames, embs, target, mask, lengths = self._collate(items, clips)

                self.optimizer.zero_grad()
                pred = self.model(frames, embs, lengths if mask is not None else None)
                loss = combined_loss_t(pred, target, cfg.loss_mode, mask,
                                       cfg.sc_on_linear)
                if not torch.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite training loss at step {self.schedule.step + 1} "
                        f"(epoch {self.epoch}); aborting")
                loss.backward()
                if cfg.grad_clip_norm is not None:
                    torch.nn.utils.clip_grad_norm_(self.model.parameters(),
                                                   cfg.grad_clip_norm)
                self.schedule = self.schedule.advanced()
                lr = lr_at(self.schedule)
                self.optimizer.step(lr)
                loss_value = float(loss.detach())
                epoch_losses.append(loss_value)
                metrics.write(f"{self.schedule.step}\t{lr:.8g}\t{loss_value:.8g}\t\n")
        return float(np.mean(epoch_losses))

    @torch.no_grad()
    def validate(self) -> float:
        self.model.eval()
        cfg = self.train_cfg
        losses = []
        for entry in self.val_entries:
            item = self._item(entry)
            clip = center_crop(item.clip)
            frames = torch.from_numpy(np.array(clip.frames)).unsqueeze(0)
            emb = torch.from_numpy(np.array(item.emb)).unsqueeze(0)
            pred = self.model(frames, emb)
            target = torch.from_numpy(np.array(item.mel)).unsqueeze(0)
            losses.append(float(combined_loss_t(pred, target, cfg.loss_mode,
                                                sc_on_linear=cfg.sc_on_linear)))
        val = float(np.mean(losses))
        with open(self._metrics_path, "a") as metrics:
            metrics.write(f"{self.schedule.step}\t{lr_at(self.schedule):.8g}\t\t{val:.8g}\n")
        return val

    def save_checkpoint(self, path, val_loss: float) -> None:
        torch.save({
            "version": CHECKPOINT_VERSION,
            "model_config": self.model_cfg.to_dict(),
            "train_config": self.train_cfg.to_dict(),
            "model_state": self.model.state_dict(),
            "optimizer_state": self.optimizer.state_dict(),
            "epoch": self.epoch,
            "val_loss": val_loss,
            "schedule_step": self.schedule.step,
            "best_val": self.best_val,
            "torch_rng": torch.get_rng_state(),
        }, path)

    def restore_checkpoint(self, path) -> None:
        state = torch.load(path, weights_only=False)
        self.model.load_state_dict(state["model_state"])
        self.optimizer.load_state_dict(state["optimizer_state"])
        self.epoch = state["epoch"]
        self.best_val = state["best_val"]
        self.schedule = ScheduleState(step=state["schedule_step"],
                                      total_steps=self.schedule.total_steps,
                                      warmup_steps=self.schedule.warmup_steps,
                                      peak_lr=self.schedule.peak_lr)
        torch.set_rng_state(state["torch_rng"])

    def run(self) -> Path:
        cfg = self.train_cfg
        while self.epoch < cfg.epochs:
            self.train_epoch()
            val = self.validate()
            last = self.epoch == cfg.epochs
            if self.epoch % cfg.checkpoint_every == 0 or last:
                path = self.run_dir / "checkpoints" / f"epoch_{self.epoch:04d}.pt"
                if val < self.best_val:
                    self.best_val = val
                    self.best_path = path
                self.save_checkpoint(path, val)
        assert self.best_path is not None
        return self.best_path


def fit(manifest_path, model_cfg: ModelConfig, train_cfg: TrainConfig,
        rng_seed: int = 0, run_dir=None) -> Path:
    """Train on the manifest's train split, validating per epoch.

    Returns the path of the written checkpoint with the lowest
    validation loss. run_dir defaults to "run" beside the manifest.
    """
    if run_dir is None:
        run_dir = Path(manifest_path).parent / "run"
    return Trainer(manifest_path, model_cfg, train_cfg, rng_seed, run_dir).run()


def load_predictor(checkpoint_path) -> tuple[SpectrogramPredictor, dict]:
    """Rebuild the model from a checkpoint; returns (model in eval mode, state)."""
    state = torch.load(checkpoint_path, weights_only=False)
    cfg = ModelConfig(**state["model_config"])
    model = SpectrogramPredictor(cfg)
    model.load_state_dict(state["model_state"])
    model.eval()
    return model, state
