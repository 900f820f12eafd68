"""Phase reconstruction from magnitude spectrograms.

Implements the fast variant of the classic alternating-projection
scheme: each iteration replaces the magnitude, re-analyzes, and
extrapolates the phase update with a momentum term. Momentum 0 recovers
the original algorithm, whose projection error is non-increasing.
"""

from __future__ import annotations

import numpy as np

from ..core.types import Waveform
from .stft import LinearSpectrogram, StftConfig, istft, stft


def spectral_error(mag: np.ndarray, signal: np.ndarray,
                   cfg: StftConfig = StftConfig()) -> float:
    """Relative Frobenius distance between mag and the signal's STFT magnitude."""
    est = np.abs(stft(signal, cfg))[: mag.shape[0]]
    denom = np.linalg.norm(mag)
    if denom == 0.0:
        return float(np.linalg.norm(est))
    return float(np.linalg.norm(mag - est) / denom)


def griffin_lim(mag: LinearSpectrogram, cfg: StftConfig = StftConfig(),
                iterations: int = 30, momentum: float = 0.99,
                rng_seed: int = 0) -> Waveform:
    """Estimate a 24 kHz waveform whose STFT magnitude approaches mag.

    The initial phase is drawn uniformly from the given seed, so output
    is bit-reproducible. If the synthesized signal exceeds full scale it
    is peak-normalized.
    """
    if not 0.0 <= momentum < 1.0:
        raise ValueError(f"momentum must lie in [0, 1), got {momentum}")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")

    m = mag.magnitudes
    length = m.shape[0] * cfg.hop_samples
    if not m.any():
        return Waveform(np.zeros(length))

    rng = np.random.default_rng(rng_seed)
    angles = np.exp(2j * np.pi * rng.random(m.shape))
    rebuilt = np.zeros_like(angles)
    shrink = momentum / (1.0 + momentum)
    for _ in range(iterations):
        previous = rebuilt
        inverse = istft(m * angles, cfg, length=length)
        rebuilt = stft(inverse, cfg)[: m.shape[0]]
        update = rebuilt - shrink * previous
        angles = update / (np.abs(update) + 1e-16)

    samples = istft(m * angles, cfg, length=length)
    peak = np.abs(samples).max()
    if peak > 1.0:
        samples = samples / peak
    return Waveform(samples)
