"""Landmark track smoothing."""

from __future__ import annotations

import numpy as np

from ..core.types import LandmarkTrack


def smooth_landmarks(track: LandmarkTrack, window: int = 12) -> LandmarkTrack:
    """Average each frame's landmarks over a centered sliding window.

    The window spans frames [t - window/2, t + window/2 - 1] and is
    truncated at clip boundaries, so short or boundary-adjacent frames
    average over whatever neighbors exist.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    pts = track.points
    t = pts.shape[0]
    half = window // 2
    # prefix sums give O(T) windowed means
    csum = np.concatenate([np.zeros((1, 68, 2)), np.cumsum(pts, axis=0)])
    out = np.empty_like(pts)
    for i in range(t):
        lo = max(0, i - half)
        hi = min(t, i + (window - half))
        out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return LandmarkTrack(out)
