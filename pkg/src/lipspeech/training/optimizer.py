"""Decoupled-weight-decay Adam.

The functional core runs one bias-corrected moment update with the
decay applied directly to the parameters (not through the gradients);
the AdamW class carries per-parameter moments for a torch module.
"""

from __future__ import annotations

from typing import Iterable, Tuple

import torch


def adamw_step(param, grad, exp_avg, exp_avg_sq, step: int, lr: float,
               betas: Tuple[float, float] = (0.9, 0.98), eps: float = 1e-8,
               weight_decay: float = 0.01):
    """One update; step is 1-based. Returns (param, exp_avg, exp_avg_sq).

    Works on floats, numpy arrays, and torch tensors alike.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    beta1, beta2 = betas
    param = param * (1.0 - lr * weight_decay)
    exp_avg = beta1 * exp_avg + (1.0 - beta1) * grad
    exp_avg_sq = beta2 * exp_avg_sq + (1.0 - beta2) * grad * grad
    corrected_avg = exp_avg / (1.0 - beta1 ** step)
    corrected_sq = exp_avg_sq / (1.0 - beta2 ** step)
    param = param - lr * corrected_avg / (corrected_sq ** 0.5 + eps)
    return param, exp_avg, exp_avg_sq


class AdamW:
    """Optimizer state over named torch parameters."""

    def __init__(self, named_params: Iterable[tuple[str, torch.nn.Parameter]],
                 betas: Tuple[float, float] = (0.9, 0.98), eps: float = 1e-8,
                 weight_decay: float = 0.01):
        self.params = [(name, p) for name, p in named_params if p.requires_grad]
        if not self.params:
            raise ValueError("no trainable parameters")
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.exp_avg = {name: torch.zeros_like(p) for name, p in self.params}
        self.exp_avg_sq = {name: torch.zeros_like(p) for name, p in self.params}

    @torch.no_grad()
    def step(self, lr: float) -> None:
        self.step_count += 1
        for name, p in self.params:
            if p.grad is None:
                grad = torch.zeros_like(p)
            else:
                if not torch.isfinite(p.grad).all():
                    raise FloatingPointError(f"non-finite gradient in parameter {name}")
                grad = p.grad
            new_p, m, v = adamw_step(p, grad, self.exp_avg[name],
                                     self.exp_avg_sq[name], self.step_count, lr,
                                     self.betas, self.eps, self.weight_decay)
            p.copy_(new_p)
            self.exp_avg[name] = m
            self.exp_avg_sq[name] = v

    def zero_grad(self) -> None:
        for _, p in self.params:
            if p.grad is not None:
                p.grad = None

    def state_dict(self) -> dict:
        return {"step_count": self.step_count,
                "exp_avg": {k: v.clone() for k, v in self.exp_avg.items()},
                "exp_avg_sq": {k: v.clone() for k, v in self.exp_avg_sq.items()}}

    def load_state_dict(self, state: dict) -> None:
        self.step_count = state["step_count"]
        self.exp_avg = {k: v.clone() for k, v in state["exp_avg"].items()}
        self.exp_avg_sq = {k: v.clone() for k, v in state["exp_avg_sq"].items()}
