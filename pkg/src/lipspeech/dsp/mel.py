"""Mel analysis: filterbank construction, log-mel extraction, inversion.

Log-mel uses the natural log with a floor of 1e-10, full-band filters
(0 Hz to Nyquist) on the HTK mel scale, and magnitude (not power)
spectra. Inversion goes through the clamped Moore-Penrose pseudo-inverse
of the filterbank.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..core.types import MelSpectrogram, Waveform, MEL_BANDS, SAMPLE_RATE
from .stft import LinearSpectrogram, StftConfig, stft

LOG_FLOOR = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int = MEL_BANDS, n_fft: int = 2048,
                   sample_rate: int = SAMPLE_RATE, fmin: float = 0.0,
                   fmax: float | None = None) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, n_fft/2 + 1)."""
    if fmax is None:
        fmax = sample_rate / 2.0
    if fmax > sample_rate / 2.0:
        raise ValueError(f"fmax {fmax} exceeds Nyquist {sample_rate / 2}")
    if not fmin < fmax:
        raise ValueError(f"need fmin < fmax, got {fmin} >= {fmax}")

    mel_pts = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)

    fb = np.zeros((n_mels, bin_freqs.shape[0]))
    for i in range(n_mels):
        lo, center, hi = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        up = (bin_freqs - lo) / (center - lo)
        down = (hi - bin_freqs) / (hi - center)
        fb[i] = np.clip(np.minimum(up, down), 0.0, None)
    if (fb.sum(axis=1) <= 0).any():
        raise ValueError("degenerate filterbank: some filter covers no FFT bin")
    return fb


@lru_cache(maxsize=8)
def _cached_filterbank(n_mels, n_fft, sample_rate, fmin, fmax):
    return mel_filterbank(n_mels, n_fft, sample_rate, fmin, fmax)


@lru_cache(maxsize=8)
def _cached_pinv(n_mels, n_fft, sample_rate, fmin, fmax):
    fb = _cached_filterbank(n_mels, n_fft, sample_rate, fmin, fmax)
    return np.clip(np.linalg.pinv(fb), 0.0, None)


def _harmonize_length(samples: np.ndarray, num_video_frames: int,
                      cfg: StftConfig) -> np.ndarray:
    # One 20 fps video frame spans 4 mel hops: trim or zero-pad the audio
    # so the mel frame count is exactly 4 * T.
    target = num_video_frames * 4 * cfg.hop_samples
    if samples.shape[0] >= target:
        return samples[:target]
    return np.concatenate([samples, np.zeros(target - samples.shape[0])])


def log_mel(waveform, cfg: StftConfig = StftConfig(), n_mels: int = MEL_BANDS,
            fmin: float = 0.0, fmax: float | None = None,
            num_video_frames: int | None = None) -> MelSpectrogram:
    """Log-mel spectrogram of a 24 kHz waveform at 80 frames per second.

    When num_video_frames is given the audio is trimmed or zero-padded so
    the output has exactly 4 * num_video_frames frames.
    """
    if isinstance(waveform, Waveform):
        samples = waveform.samples
    else:
        samples = np.asarray(waveform, dtype=np.float64)
    if num_video_frames is not None:
        samples = _harmonize_length(samples, num_video_frames, cfg)

    mag = np.abs(stft(samples, cfg))
    fb = _cached_filterbank(n_mels, cfg.n_fft, SAMPLE_RATE, fmin,
                            fmax if fmax is not None else SAMPLE_RATE / 2.0)
    mel_energy = mag @ fb.T
    return MelSpectrogram(np.log(np.maximum(mel_energy, LOG_FLOOR)))


def mel_to_linear(mel: MelSpectrogram, cfg: StftConfig = StftConfig(),
                  fmin: float = 0.0, fmax: float | None = None,
                  refine_steps: int = 5) -> LinearSpectrogram:
    """Approximate linear-frequency magnitudes from a log-mel spectrogram.

    Exponentiates, seeds with the zero-clamped pseudo-inverse of the
    filterbank, then sharpens the estimate with a few multiplicative
    nonnegative least-squares updates. The clamped seed alone leaves
    ~0.35 relative round-trip error on harmonic spectra (the clamp
    inflates the inter-harmonic valleys); five refinement steps bring it
    under 0.1. Output is always a valid magnitude spectrogram.
    """
    key = (mel.values.shape[1], cfg.n_fft, SAMPLE_RATE, fmin,
           fmax if fmax is not None else SAMPLE_RATE / 2.0)
    pinv = _cached_pinv(*key)
    fb = _cached_filterbank(*key)
    energy = np.exp(mel.values.astype(np.float64))
    linear = np.clip(energy @ pinv.T, 0.0, None)
    for _ in range(refine_steps):
        numer = energy @ fb
        denom = (linear @ fb.T) @ fb + 1e-12
        linear *= numer / denom
    return LinearSpectrogram(linear)


def mel_from_linear(linear: LinearSpectrogram, n_mels: int = MEL_BANDS,
                    cfg: StftConfig = StftConfig(), fmin: float = 0.0,
                    fmax: float | None = None) -> MelSpectrogram:
    """Project linear magnitudes onto the mel filterbank (log domain)."""
    fb = _cached_filterbank(n_mels, cfg.n_fft, SAMPLE_RATE, fmin,
                            fmax if fmax is not None else SAMPLE_RATE / 2.0)
    mel_energy = linear.magnitudes @ fb.T
    return MelSpectrogram(np.log(np.maximum(mel_energy, LOG_FLOOR)))
