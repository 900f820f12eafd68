"""Training-time video augmentation.

All randomness flows from an explicit seed, drawn in a fixed order
(crop row, crop col, flip, erase gate, erase geometry), so augmented
clips are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.types import VideoClip, MODEL_CLIP_SIZE, STORED_CLIP_SIZE, VIDEO_FPS


@dataclass(frozen=True)
class AugmentConfig:
    crop: int = MODEL_CLIP_SIZE
    hflip_p: float = 0.5
    erase_p: float = 0.5
    erase_area: tuple[float, float] = (0.02, 0.33)
    erase_aspect: tuple[float, float] = (0.3, 3.3)
    time_mask_max_s: float = 0.4
    time_mask_per_s: int = 1

    def __post_init__(self):
        for p in (self.hflip_p, self.erase_p):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        for lo, hi in (self.erase_area, self.erase_aspect):
            if not 0 < lo <= hi:
                raise ValueError("area and aspect ranges must be ordered and positive")


def _sample_erase(rng: np.random.Generator, size: int,
                  cfg: AugmentConfig) -> tuple[int, int, int, int] | None:
    # Rejection-sample integer dims whose realized area fraction and
    # aspect ratio stay inside the configured ranges.
    for _ in range(100):
        frac = rng.uniform(*cfg.erase_area)
        aspect = rng.uniform(*cfg.erase_aspect)
        h = int(round(math.sqrt(frac * size * size * aspect)))
        w = int(round(math.sqrt(frac * size * size / aspect)))
        if not (1 <= h <= size and 1 <= w <= size):
            continue
        realized_frac = h * w / (size * size)
        realized_aspect = h / w
        if (cfg.erase_area[0] <= realized_frac <= cfg.erase_area[1]
                and cfg.erase_aspect[0] <= realized_aspect <= cfg.erase_aspect[1]):
            r = int(rng.integers(0, size - h + 1))
            c = int(rng.integers(0, size - w + 1))
            return r, c, h, w
    return None


def augment(clip: VideoClip, cfg: AugmentConfig = AugmentConfig(),
            rng_seed: int = 0) -> VideoClip:
    """Random crop + horizontal flip + random erasing, one draw per clip.

    The crop window, flip decision, and erase rectangle are shared by
    every frame. The erase rectangle is filled with the mean pixel value
    of the cropped clip.
    """
    if clip.size != STORED_CLIP_SIZE:
        raise ValueError(f"augment expects {STORED_CLIP_SIZE}-pixel clips, got {clip.size}")
    rng = np.random.default_rng(rng_seed)
    size = cfg.crop
    max_off = clip.size - size

    r0 = int(rng.integers(0, max_off + 1))
    c0 = int(rng.integers(0, max_off + 1))
    frames = clip.frames[:, r0:r0 + size, c0:c0 + size].copy()
    if rng.random() < cfg.hflip_p:
        frames = frames[:, :, ::-1].copy()
    if rng.random() < cfg.erase_p:
        rect = _sample_erase(rng, size, cfg)
        if rect is not None:
            r, c, h, w = rect
            frames[:, r:r + h, c:c + w] = frames.mean(dtype=np.float64)
    return VideoClip(frames)


def time_mask(clip: VideoClip, max_mask_s: float = 0.4,
              rng_seed: int = 0) -> VideoClip:
    """Mask one contiguous frame run per full second of video.

    Each run's length is floor(U(0, max_mask_s) * fps) frames, placed
    uniformly inside its second; masked frames are replaced by the
    clip-wide mean pixel value. Partial trailing seconds are untouched.
    """
    fps = int(clip.fps)
    rng = np.random.default_rng(rng_seed)
    frames = clip.frames.copy()
    fill = np.float32(frames.mean(dtype=np.float64))
    for sec in range(clip.num_frames // fps):
        length = int(rng.uniform(0.0, max_mask_s) * fps)
        if length == 0:
            continue
        start = sec * fps + int(rng.integers(0, fps - length + 1))
        frames[start:start + length] = fill
    return VideoClip(frames)
