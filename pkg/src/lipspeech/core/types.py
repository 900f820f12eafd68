"""Domain types shared across the pipeline.

All types are immutable after construction and validate their invariants
eagerly, so a value that exists is a value that is well-formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VIDEO_FPS = 20.0
MEL_FRAME_RATE = 80.0
MEL_BANDS = 80
SAMPLE_RATE = 24000
STORED_CLIP_SIZE = 96
MODEL_CLIP_SIZE = 88


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class VideoClip:
    """A mouth-region clip: T square grayscale frames with values in [0, 1]."""

    frames: np.ndarray  # (T, H, W)
    fps: float = VIDEO_FPS

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=np.float32)
        if f.ndim != 3 or f.shape[0] < 1:
            raise ValueError(f"frames must be (T, H, W) with T >= 1, got {f.shape}")
        t, h, w = f.shape
        if h != w or h not in (STORED_CLIP_SIZE, MODEL_CLIP_SIZE):
            raise ValueError(f"frames must be square 96 or 88, got {h}x{w}")
        if not np.isfinite(f).all() or f.min() < 0.0 or f.max() > 1.0:
            raise ValueError("frame values must be finite and within [0, 1]")
        if self.fps != VIDEO_FPS:
            raise ValueError(f"fps must be {VIDEO_FPS}, got {self.fps}")
        object.__setattr__(self, "frames", _freeze(f))

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def size(self) -> int:
        return self.frames.shape[1]

    @property
    def duration_s(self) -> float:
        return self.num_frames / self.fps


@dataclass(frozen=True)
class MelSpectrogram:
    """Log-mel magnitudes, 80 bands at 80 frames per second, shape (F, 80)."""

    values: np.ndarray
    frame_rate: float = MEL_FRAME_RATE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError(f"values must be (F, 80) with F >= 1, got {v.shape}")
        if v.shape[1] != MEL_BANDS:
            raise ValueError(f"expected {MEL_BANDS} mel bands, got {v.shape[1]}")
        if not np.isfinite(v).all():
            raise ValueError("mel values must be finite")
        if self.frame_rate != MEL_FRAME_RATE:
            raise ValueError(f"frame_rate must be {MEL_FRAME_RATE}")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Waveform:
    """Mono audio at 24 kHz with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.shape[0] < 1:
            raise ValueError(f"samples must be a non-empty 1-D array, got {s.shape}")
        if not np.isfinite(s).all():
            raise ValueError("samples must be finite")
        if np.abs(s).max() > 1.0 + 1e-9:
            raise ValueError("samples must lie within [-1, 1]")
        if self.sample_rate != SAMPLE_RATE:
            raise ValueError(f"sample_rate must be {SAMPLE_RATE}, got {self.sample_rate}")
        object.__setattr__(self, "samples", _freeze(np.clip(s, -1.0, 1.0)))

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.num_samples / self.sample_rate


@dataclass(frozen=True)
class SpeakerEmbedding:
    """Unit-norm voice-characteristic vector for one speaker."""

    vector: np.ndarray
    speaker_id: str = ""

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float32)
        if v.ndim != 1 or v.shape[0] < 1:
            raise ValueError(f"vector must be 1-D and non-empty, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("embedding values must be finite")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > 1e-5:
            raise ValueError(f"embedding must be unit-norm (got norm {norm:.6g}); "
                             "use SpeakerEmbedding.from_raw to normalize")
        object.__setattr__(self, "vector", _freeze(v))

    @classmethod
    def from_raw(cls, vector: np.ndarray, speaker_id: str = "") -> "SpeakerEmbedding":
        """Normalize an arbitrary non-zero vector to unit length."""
        v = np.asarray(vector, dtype=np.float64)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(vector=(v / norm).astype(np.float32), speaker_id=speaker_id)

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class LandmarkTrack:
    """Per-frame 68-point facial landmarks, shape (T, 68, 2) in (x, y) pixels."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64)
        if p.ndim != 3 or p.shape[1:] != (68, 2) or p.shape[0] < 1:
            raise ValueError(f"points must be (T, 68, 2) with T >= 1, got {p.shape}")
        if not np.isfinite(p).all():
            raise ValueError("landmark coordinates must be finite")
        object.__setattr__(self, "points", _freeze(p))

    @property
    def num_frames(self) -> int:
        return self.points.shape[0]

    def translated(self, dx: float, dy: float) -> "LandmarkTrack":
        return LandmarkTrack(self.points + np.array([dx, dy]))
