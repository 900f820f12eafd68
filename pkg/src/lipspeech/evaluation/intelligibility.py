"""Short-time objective intelligibility measures.

Both measures follow the canonical published configuration: resample to
10 kHz, drop frames more than 40 dB below the reference's loudest frame
(25.6 ms Hann frames, 50% overlap), analyze with a 512-point FFT into
15 one-third-octave bands starting at 150 Hz, and correlate band
envelopes over 384 ms (30-frame) segments.

The basic measure clips the degraded envelope at -15 dB SDR and
averages per-band envelope correlations; the extended variant
mean/variance-normalizes whole spectrogram segments (rows, then
columns) and averages per-column inner products, trading the clipping
heuristic for joint spectral structure.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.signal import resample_poly

from ..core.types import Waveform

ANALYSIS_RATE = 10000
FRAME_LEN = 256          # 25.6 ms at 10 kHz
FRAME_HOP = 128
FFT_LEN = 512
NUM_BANDS = 15
MIN_CENTER_FREQ = 150.0
SEGMENT_FRAMES = 30      # 384 ms
DYN_RANGE_DB = 40.0
CLIP_SDR_DB = -15.0
_EPS = 1e-15


def _hann(n: int) -> np.ndarray:
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


@lru_cache(maxsize=1)
def third_octave_bands() -> np.ndarray:
    """Boolean (NUM_BANDS, FFT_LEN/2 + 1) matrix gathering FFT bins per band."""
    freqs = np.arange(FFT_LEN // 2 + 1) * (ANALYSIS_RATE / FFT_LEN)
    k = np.arange(NUM_BANDS)
    lo = MIN_CENTER_FREQ * 2.0 ** ((2 * k - 1) / 6.0)
    hi = MIN_CENTER_FREQ * 2.0 ** ((2 * k + 1) / 6.0)
    obm = np.zeros((NUM_BANDS, freqs.shape[0]))
    for i in range(NUM_BANDS):
        lo_bin = int(np.argmin((freqs - lo[i]) ** 2))
        hi_bin = int(np.argmin((freqs - hi[i]) ** 2))
        obm[i, lo_bin:hi_bin] = 1.0
    return obm


def _to_analysis_rate(signal, sample_rate: int | None):
    if isinstance(signal, Waveform):
        samples, rate = signal.samples, signal.sample_rate
    else:
        samples = np.asarray(signal, dtype=np.float64)
        if sample_rate is None:
            raise ValueError("sample_rate required for bare arrays")
        rate = sample_rate
    if rate == ANALYSIS_RATE:
        return samples
    g = math.gcd(rate, ANALYSIS_RATE)
    return resample_poly(samples, ANALYSIS_RATE // g, rate // g)


def _frame(x: np.ndarray) -> np.ndarray:
    n = 1 + (x.shape[0] - FRAME_LEN) // FRAME_HOP
    if n < 1:
        raise ValueError("signal shorter than one analysis frame")
    idx = np.arange(FRAME_LEN)[None, :] + FRAME_HOP * np.arange(n)[:, None]
    return x[idx] * _hann(FRAME_LEN)


def remove_silent_frames(ref: np.ndarray, deg: np.ndarray):
    """Drop frame pairs whose reference energy trails the peak by > 40 dB."""
    xf = _frame(ref)
    yf = _frame(deg)
    energy = 20.0 * np.log10(np.linalg.norm(xf, axis=1) + _EPS)
    keep = energy > energy.max() - DYN_RANGE_DB
    xf, yf = xf[keep], yf[keep]
    if xf.shape[0] == 0:
        raise ValueError("no frames above the energy threshold")
    out_len = (xf.shape[0] - 1) * FRAME_HOP + FRAME_LEN
    x_out = np.zeros(out_len)
    y_out = np.zeros(out_len)
    for i in range(xf.shape[0]):  # Hann at 50% overlap sums to 1
        start = i * FRAME_HOP
        x_out[start:start + FRAME_LEN] += xf[i]
        y_out[start:start + FRAME_LEN] += yf[i]
    return x_out, y_out


def band_envelopes(x: np.ndarray) -> np.ndarray:
    """One-third-octave band magnitudes per frame, shape (NUM_BANDS, frames)."""
    frames = _frame(x)
    spec = np.fft.rfft(frames, n=FFT_LEN, axis=1)
    power = (spec.real ** 2 + spec.imag ** 2).T  # (bins, frames)
    return np.sqrt(third_octave_bands() @ power)


def _prepare(ref, deg, sample_rate):
    x = _to_analysis_rate(ref, sample_rate)
    y = _to_analysis_rate(deg, sample_rate)
    n = min(x.shape[0], y.shape[0])
    x, y = x[:n], y[:n]
    x, y = remove_silent_frames(x, y)
    xb = band_envelopes(x)
    yb = band_envelopes(y)
    if xb.shape[1] < SEGMENT_FRAMES:
        raise ValueError(
            f"too short: {xb.shape[1]} analysis frames, need >= {SEGMENT_FRAMES} "
            "(384 ms of above-threshold speech)")
    return xb, yb


def stoi(ref, deg, sample_rate: int | None = None) -> float:
    """Short-time intelligibility of deg against the reference ref.

    Accepts Waveform inputs or bare arrays plus sample_rate; lengths are
    harmonized by truncating to the shorter. Typically lands in [0, 1].
    """
    xb, yb = _prepare(ref, deg, sample_rate)
    n_seg = xb.shape[1] - SEGMENT_FRAMES + 1
    clip_gain = 10.0 ** (-CLIP_SDR_DB / 20.0)
    total = 0.0
    for m in range(n_seg):
        x = xb[:, m:m + SEGMENT_FRAMES]
        y = yb[:, m:m + SEGMENT_FRAMES]
        alpha = (np.linalg.norm(x, axis=1, keepdims=True)
                 / (np.linalg.norm(y, axis=1, keepdims=True) + _EPS))
        y_hat = np.minimum(alpha * y, (1.0 + clip_gain) * x)
        xz = x - x.mean(axis=1, keepdims=True)
        yz = y_hat - y_hat.mean(axis=1, keepdims=True)
        corr = (xz * yz).sum(axis=1) / (np.linalg.norm(xz, axis=1)
                                        * np.linalg.norm(yz, axis=1) + _EPS)
        total += corr.sum()
    return float(total / (n_seg * NUM_BANDS))


def estoi(ref, deg, sample_rate: int | None = None) -> float:
    """Extended short-time intelligibility (spectral correlation variant)."""
    xb, yb = _prepare(ref, deg, sample_rate)
    n_seg = xb.shape[1] - SEGMENT_FRAMES + 1

    def normalize(seg: np.ndarray) -> np.ndarray:
        rows = seg - seg.mean(axis=1, keepdims=True)
        rows = rows / (np.linalg.norm(rows, axis=1, keepdims=True) + _EPS)
        cols = rows - rows.mean(axis=0, keepdims=True)
        return cols / (np.linalg.norm(cols, axis=0, keepdims=True) + _EPS)

    total = 0.0
    for m in range(n_seg):
        x = normalize(xb[:, m:m + SEGMENT_FRAMES])
        y = normalize(yb[:, m:m + SEGMENT_FRAMES])
        total += float((x * y).sum()) / SEGMENT_FRAMES
    return float(total / n_seg)
