"""The shared result type produced by every group-intervention solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GroupDelta:
    """One shared intervention with its per-instance outcome record.

    Attributes:
        delta: intervention vector in standardized units; exactly zero on
            masked features.
        objective: value of the solver's objective at ``delta``.
        slacks: per-instance margin deficit after the intervention,
            max(0, margin - y_target * score); zero for flipped-past-margin
            instances.
        flipped: per-instance flag, prediction equals the target label
            after the intervention.
        mask: the feature mask the solver ran under (True = changeable).
        can_flip: solver hint; False means no unmasked feature can affect
            the score at all, None means unknown.
        objective_trace: accepted objective values per iteration, for
            descent auditing. Single-shot solvers record one entry.
    """

    delta: np.ndarray
    objective: float
    slacks: np.ndarray
    flipped: np.ndarray
    mask: np.ndarray
    can_flip: bool | None = None
    objective_trace: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=float))
        object.__setattr__(self, "slacks", np.asarray(self.slacks, dtype=float))
        object.__setattr__(self, "flipped", np.asarray(self.flipped, dtype=bool))
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))
        if self.slacks.shape != self.flipped.shape:
            raise ValueError("slacks and flipped must have the same length")
        if self.delta.shape != self.mask.shape:
            raise ValueError("delta and mask must have the same length")

    @property
    def coverage(self) -> float:
        """Fraction of the instance set flipped by this intervention."""
        if self.flipped.size == 0:
            raise ValueError("no instances recorded")
        return float(np.mean(self.flipped))

    @property
    def n_instances(self) -> int:
        return int(self.flipped.size)
