"""Short-time Fourier analysis at the pipeline's fixed audio settings.

Framing convention: the signal is reflection-padded by (win - hop)/2 on
each side, then windows slide by one hop. Frame t is therefore centered
on (t + 0.5) * hop, and a signal whose length is a multiple of the hop
yields exactly length/hop frames -- 80 frames per second at the 24 kHz /
300-sample hop used here, which is what keeps mel frames aligned 4:1
with 20 fps video.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from ..core.types import Waveform, SAMPLE_RATE


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 2048
    hop_samples: int = 300   # 12.5 ms at 24 kHz
    win_samples: int = 1200  # 50 ms at 24 kHz
    window: str = "hann"

    def __post_init__(self):
        if self.win_samples > self.n_fft:
            raise ValueError("win_samples must not exceed n_fft")
        if not 0 < self.hop_samples <= self.win_samples:
            raise ValueError("hop_samples must lie in (0, win_samples]")

    @property
    def num_bins(self) -> int:
        return self.n_fft // 2 + 1


@dataclass(frozen=True)
class LinearSpectrogram:
    """Nonnegative STFT magnitudes, shape (F, n_fft/2 + 1)."""

    magnitudes: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.magnitudes, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 2:
            raise ValueError(f"magnitudes must be (F, bins), got {m.shape}")
        if not np.isfinite(m).all() or m.min() < 0.0:
            raise ValueError("magnitudes must be finite and nonnegative")
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "magnitudes", m)

    @property
    def num_frames(self) -> int:
        return self.magnitudes.shape[0]


def _window(cfg: StftConfig) -> np.ndarray:
    # Periodic window: win/4 hop then satisfies the squared-COLA condition,
    # which is what makes istft(stft(x)) exact on the interior.
    return get_window(cfg.window, cfg.win_samples, fftbins=True).astype(np.float64)


def _pad_signal(samples: np.ndarray, cfg: StftConfig) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.shape[0] < cfg.win_samples:
        x = np.concatenate([x, np.zeros(cfg.win_samples - x.shape[0])])
    edge = (cfg.win_samples - cfg.hop_samples) // 2
    return np.pad(x, (edge, edge), mode="reflect")


def stft(waveform, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Complex STFT of a 24 kHz signal, shape (F, n_fft/2 + 1).

    Accepts a Waveform or a bare 1-D sample array. Inputs shorter than
    one window are zero-padded up to it.
    """
    if isinstance(waveform, Waveform):
        samples = waveform.samples
    else:
        samples = np.asarray(waveform, dtype=np.float64)
    if samples.ndim != 1 or samples.shape[0] == 0:
        raise ValueError("stft expects a non-empty 1-D signal")

    x = _pad_signal(samples, cfg)
    win, hop = cfg.win_samples, cfg.hop_samples
    num_frames = 1 + (x.shape[0] - win) // hop
    frames = np.lib.stride_tricks.sliding_window_view(x, win)[::hop][:num_frames]
    return np.fft.rfft(frames * _window(cfg), n=cfg.n_fft, axis=1)


def stft_magnitude(waveform, cfg: StftConfig = StftConfig()) -> LinearSpectrogram:
    return LinearSpectrogram(np.abs(stft(waveform, cfg)))


def istft(spec: np.ndarray, cfg: StftConfig = StftConfig(),
          length: int | None = None) -> np.ndarray:
    """Invert a complex STFT by windowed overlap-add.

    Exact (to rounding) on the interior for window/hop pairs satisfying
    the squared-COLA condition, which holds for the default 1200/300
    Hann configuration. length defaults to num_frames * hop.
    """
    spec = np.asarray(spec)
    if spec.ndim != 2 or spec.shape[0] < 1:
        raise ValueError(f"spec must be (F, bins), got {spec.shape}")
    win, hop = cfg.win_samples, cfg.hop_samples
    window = _window(cfg)
    num_frames = spec.shape[0]
    if length is None:
        length = num_frames * hop

    frames = np.fft.irfft(spec, n=cfg.n_fft, axis=1)[:, :win] * window
    padded_len = (num_frames - 1) * hop + win
    out = np.zeros(padded_len)
    wsum = np.zeros(padded_len)
    wsq = window * window
    for m in range(num_frames):
        start = m * hop
        out[start:start + win] += frames[m]
        wsum[start:start + win] += wsq
    out /= np.maximum(wsum, 1e-12)

    edge = (win - hop) // 2
    result = np.zeros(length)
    avail = min(length, padded_len - edge)
    result[:avail] = out[edge:edge + avail]
    return result


def num_stft_frames(num_samples: int, cfg: StftConfig = StftConfig()) -> int:
    """Frame count stft() will produce for a signal of the given length."""
    n = max(num_samples, cfg.win_samples)
    padded = n + 2 * ((cfg.win_samples - cfg.hop_samples) // 2)
    return 1 + (padded - cfg.win_samples) // cfg.hop_samples
