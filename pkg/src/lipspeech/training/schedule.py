"""Learning-rate schedule: linear warmup into cosine decay.

Warmup is measured in optimizer steps. The rate ramps linearly from 0
to the peak over the warmup span, then follows half a cosine down to 0
at the final step; the two pieces meet at the peak, so the schedule is
continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ScheduleState:
    step: int
    total_steps: int
    warmup_steps: int
    peak_lr: float

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        # warmup == total only in degenerate few-step runs: all ramp, no decay
        if not 0 < self.warmup_steps <= self.total_steps:
            raise ValueError("warmup_steps must lie in (0, total_steps]")
        if not 0 <= self.step <= self.total_steps:
            raise ValueError(f"step {self.step} outside [0, {self.total_steps}]")
        if self.peak_lr <= 0:
            raise ValueError("peak_lr must be positive")

    @classmethod
    def for_run(cls, total_steps: int, peak_lr: float,
                warmup_fraction: float = 0.1, step: int = 0) -> "ScheduleState":
        warmup = max(1, round(warmup_fraction * total_steps))
        warmup = min(warmup, max(1, total_steps - 1))
        return cls(step=step, total_steps=total_steps, warmup_steps=warmup,
                   peak_lr=peak_lr)

    def advanced(self, by: int = 1) -> "ScheduleState":
        return replace(self, step=self.step + by)


def lr_at(state: ScheduleState) -> float:
    """Learning rate at the state's current step."""
    if state.step <= state.warmup_steps:
        return state.peak_lr * state.step / state.warmup_steps
    progress = (state.step - state.warmup_steps) / (state.total_steps - state.warmup_steps)
    return state.peak_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def schedule_curve(total_steps: int, peak_lr: float,
                   warmup_fraction: float = 0.1) -> list[float]:
    """The full learning-rate trajectory, mostly for plots and logs."""
    state = ScheduleState.for_run(total_steps, peak_lr, warmup_fraction)
    return [lr_at(ScheduleState(step=s, total_steps=state.total_steps,
                                warmup_steps=state.warmup_steps,
                                peak_lr=peak_lr))
            for s in range(total_steps + 1)]
