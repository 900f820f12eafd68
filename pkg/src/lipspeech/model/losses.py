"""Training losses on log-mel spectrograms.

The combined objective is an unweighted sum of the mean absolute error
and the spectral convergence loss; the latter is the relative Frobenius
distance between magnitude spectrograms, computed by default on the
exponentiated (linear-scale) mels.
"""

from __future__ import annotations

import numpy as np
import torch

from ..core.types import MelSpectrogram

LOSS_MODES = ("l1_only", "sc_only", "combined")


def l1_loss_t(pred: torch.Tensor, target: torch.Tensor,
              mask: torch.Tensor | None = None) -> torch.Tensor:
    """Mean absolute difference over (valid) cells. Shapes must match."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    diff = (pred - target).abs()
    if mask is None:
        return diff.mean()
    m = mask.to(diff.dtype)
    return (diff * m).sum() / m.sum().clamp_min(1.0)


def spectral_convergence_t(pred: torch.Tensor, target: torch.Tensor,
                           mask: torch.Tensor | None = None,
                           on_linear: bool = True) -> torch.Tensor:
    """||M(target) - M(pred)||_F / ||M(target)||_F.

    M exponentiates to linear-scale mel magnitudes when on_linear is
    set (the default), else compares raw log values. Batched inputs
    (B, F, bands) yield the mean of per-item ratios.
    """
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    p = torch.exp(pred) if on_linear else pred
    t = torch.exp(target) if on_linear else target
    if mask is not None:
        m = mask.to(p.dtype)
        p = p * m
        t = t * m
    batched = pred.ndim == 3
    dims = tuple(range(1, pred.ndim)) if batched else None
    if batched:
        t_norm = torch.linalg.vector_norm(t, dim=dims)
        if (t_norm == 0).any():
            raise ValueError("spectral convergence undefined for zero-norm target")
        return (torch.linalg.vector_norm(t - p, dim=dims) / t_norm).mean()
    t_norm = torch.linalg.vector_norm(t)
    if t_norm == 0:
        raise ValueError("spectral convergence undefined for zero-norm target")
    return torch.linalg.vector_norm(t - p) / t_norm


def combined_loss_t(pred: torch.Tensor, target: torch.Tensor, mode: str = "combined",
                    mask: torch.Tensor | None = None,
                    sc_on_linear: bool = True) -> torch.Tensor:
    if mode not in LOSS_MODES:
        raise ValueError(f"mode must be one of {LOSS_MODES}, got {mode!r}")
    if mode == "l1_only":
        return l1_loss_t(pred, target, mask)
    if mode == "sc_only":
        return spectral_convergence_t(pred, target, mask, sc_on_linear)
    return (l1_loss_t(pred, target, mask)
            + spectral_convergence_t(pred, target, mask, sc_on_linear))


def _pair(pred: MelSpectrogram, target: MelSpectrogram):
    if pred.values.shape != target.values.shape:
        raise ValueError(f"shape mismatch: {pred.values.shape} vs {target.values.shape}")
    return (torch.from_numpy(np.array(pred.values, dtype=np.float64)),
            torch.from_numpy(np.array(target.values, dtype=np.float64)))


def l1_loss(pred: MelSpectrogram, target: MelSpectrogram) -> float:
    p, t = _pair(pred, target)
    return float(l1_loss_t(p, t))


def spectral_convergence_loss(pred: MelSpectrogram, target: MelSpectrogram,
                              on_linear: bool = True) -> float:
    p, t = _pair(pred, target)
    return float(spectral_convergence_t(p, t, on_linear=on_linear))


def combined_loss(pred: MelSpectrogram, target: MelSpectrogram,
                  mode: str = "combined", sc_on_linear: bool = True) -> float:
    p, t = _pair(pred, target)
    return float(combined_loss_t(p, t, mode, sc_on_linear=sc_on_linear))
