"""Model and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional, Tuple

MEL_BANDS = 80
RESHAPE_FACTOR = 4
PROJECTION_DIM = RESHAPE_FACTOR * MEL_BANDS  # 320

# name -> (num_blocks, attention_dim, attention_heads)
_PRESETS = {
    "S": (6, 256, 4),
    "M": (12, 256, 4),
    "L": (12, 512, 8),
}


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters of the spectrogram predictor.

    The named presets S/M/L fix (blocks, attention dim, heads) to
    (6, 256, 4), (12, 256, 4) and (12, 512, 8); all share a depthwise
    conv kernel of 31 and a feed-forward dim of 2048. Other names are
    free-form, which is how the tiny test configs are built.
    """

    name: str
    num_blocks: int
    attention_dim: int
    attention_heads: int
    conv_kernel: int = 31
    ffn_dim: int = 2048
    projection_dim: int = PROJECTION_DIM
    mel_bands: int = MEL_BANDS
    reshape_factor: int = RESHAPE_FACTOR
    speaker_dim: int = 256
    encoder_channels: int = 64  # base width of the visual front-end
    dropout: float = 0.1

    def __post_init__(self):
        if self.name in _PRESETS:
            blocks, dim, heads = _PRESETS[self.name]
            got = (self.num_blocks, self.attention_dim, self.attention_heads)
            if got != (blocks, dim, heads):
                raise ValueError(
                    f"preset {self.name} requires blocks/dim/heads {(blocks, dim, heads)}, got {got}")
            if self.conv_kernel != 31 or self.ffn_dim != 2048:
                raise ValueError(f"preset {self.name} requires conv_kernel 31 and ffn_dim 2048")
        if self.projection_dim != self.reshape_factor * self.mel_bands:
            raise ValueError("projection_dim must equal reshape_factor * mel_bands")
        if self.attention_dim % self.attention_heads != 0:
            raise ValueError("attention_dim must be divisible by attention_heads")
        if self.conv_kernel % 2 != 1:
            raise ValueError("conv_kernel must be odd")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @classmethod
    def preset(cls, name: str, **overrides) -> "ModelConfig":
        if name not in _PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
        blocks, dim, heads = _PRESETS[name]
        return cls(name=name, num_blocks=blocks, attention_dim=dim,
                   attention_heads=heads, **overrides)

    @classmethod
    def tiny(cls, **overrides) -> "ModelConfig":
        """Small config for desk-scale tests: 2 blocks, dim 32, 2 heads."""
        kw = dict(name="tiny", num_blocks=2, attention_dim=32, attention_heads=2,
                  conv_kernel=7, ffn_dim=64, speaker_dim=8, encoder_channels=8,
                  dropout=0.0)
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings for the training loop."""

    peak_lr: float = 1e-3
    betas: Tuple[float, float] = (0.9, 0.98)
    weight_decay: float = 0.01
    warmup_fraction: float = 0.1
    epochs: int = 200
    batch_size: int = 8
    loss_mode: str = "combined"  # l1_only | sc_only | combined
    max_duration_s: float = 24.0
    grad_clip_norm: Optional[float] = None  # off by default
    augment: bool = True
    time_mask: bool = False  # long-sentence training only
    sc_on_linear: bool = True  # spectral convergence on exp(log-mel)
    checkpoint_every: int = 1  # epochs between checkpoint writes
    optimizer_eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie strictly between 0 and 1")
        if self.peak_lr <= 0.0:
            raise ValueError("peak_lr must be positive")
        if self.loss_mode not in ("l1_only", "sc_only", "combined"):
            raise ValueError(f"unknown loss_mode {self.loss_mode!r}")
        if self.epochs < 1 or self.batch_size < 1 or self.checkpoint_every < 1:
            raise ValueError("epochs, batch_size and checkpoint_every must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


# Per-corpus hyperparameter presets: (peak_lr, epochs, time_mask)
TRAIN_PRESETS = {
    "grid-seen": TrainConfig(peak_lr=1e-3, epochs=200),
    "grid-unseen": TrainConfig(peak_lr=1e-3, epochs=200),
    "lrw": TrainConfig(peak_lr=1e-3, epochs=150),
    "lrs3-seen": TrainConfig(peak_lr=7e-3, epochs=500, time_mask=True),
    "lrs3-unseen": TrainConfig(peak_lr=1e-3, epochs=150, time_mask=True),
    "lrs3-voxceleb2": TrainConfig(peak_lr=1e-3, epochs=150, time_mask=True),
}
