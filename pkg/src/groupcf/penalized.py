"""Model-agnostic intervention search over any scorer.

The objective is a weighted 1-norm of the shared intervention plus a
C-weighted per-instance loss on the scorer's real-valued margin. Scorers
with an analytic margin gradient (linear models) are solved by proximal
gradient descent with soft-thresholding; piecewise-constant scorers (tree
ensembles) are solved by cyclic per-feature search over a candidate grid,
where gradients carry no information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .data import RETENTION
from .solution import GroupDelta
from .validation import as_bool_mask, as_float_matrix, as_float_vector

SQUARED_HINGE = "squared_hinge"
CROSS_ENTROPY = "cross_entropy"

# Candidate per-feature moves in standardized units for the grid strategy.
DEFAULT_COORD_GRID = (0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0)

# Accepted objective values may never increase; improvements smaller than
# this are treated as noise.
_IMPROVEMENT_EPS = 1e-12


@dataclass(frozen=True)
class PenalizedConfig:
    """Hyper-parameters for the model-agnostic solver.

    ``coord_grid`` holds the candidate values a single coordinate of the
    intervention may take under the grid strategy; it must contain 0 so
    "leave the feature alone" is always on the table.
    """

    C: float = 1.0
    loss: str = SQUARED_HINGE
    feature_costs: np.ndarray | None = None
    mask: np.ndarray | None = None
    margin: float = 1e-4
    max_iter: int = 20000
    step_size: float | None = None
    coord_grid: tuple = DEFAULT_COORD_GRID
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be > 0")
        if self.loss not in (SQUARED_HINGE, CROSS_ENTROPY):
            raise ValueError(f"unknown loss: {self.loss!r}")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        grid = tuple(float(v) for v in self.coord_grid)
        if not grid or 0.0 not in grid:
            raise ValueError("coord_grid must be non-empty and contain 0")
        object.__setattr__(self, "coord_grid", grid)

    def resolved(self, n_features: int):
        """Materialize costs and mask for a given dimensionality."""
        costs = (np.ones(n_features) if self.feature_costs is None
                 else as_float_vector(self.feature_costs, "feature_costs", n_features))
        if np.any(costs <= 0):
            raise ValueError("feature_costs must be strictly positive")
        mask = as_bool_mask(self.mask, n_features)
        return costs, mask


def _instance_matrix(D):
    X = getattr(D, "X", D)
    return as_float_matrix(X, "instance set")


def _per_instance_loss(scores, scorer, cfg):
    margins = RETENTION * scores
    if cfg.loss == SQUARED_HINGE:
        return np.maximum(0.0, cfg.margin - margins) ** 2
    # Cross-entropy on the retention probability: linear margins are
    # log-odds, bounded tree margins sit in [-0.5, 0.5].
    if getattr(scorer, "has_analytic_gradient", False):
        p = expit(scores)
    else:
        p = scores + 0.5
    return -np.log(np.clip(p, 1e-12, 1.0 - 1e-12))


def penalized_objective(delta, D, scorer, cfg: PenalizedConfig) -> float:
    """Weighted 1-norm of the masked intervention plus C times the loss sum.

    Masked coordinates are clamped to zero before both terms, so an
    intervention touching only masked features scores exactly like zero.
    """
    X = _instance_matrix(D)
    costs, mask = cfg.resolved(X.shape[1])
    delta = as_float_vector(delta, "delta", X.shape[1])
    d_eff = np.where(mask, delta, 0.0)
    scores = scorer.decision_function(X + d_eff)
    loss = float(np.sum(_per_instance_loss(scores, scorer, cfg)))
    return float(costs @ np.abs(d_eff) + cfg.C * loss)


def _loss_slope_sum(scores, scorer, cfg):
    """Sum over instances of the loss derivative w.r.t. the score."""
    margins = RETENTION * scores
    if cfg.loss == SQUARED_HINGE:
        residual = np.maximum(0.0, cfg.margin - margins)
        return float(np.sum(-2.0 * RETENTION * residual))
    return float(np.sum(-RETENTION * expit(-margins)))


def _soft_threshold(v, thresholds):
    return np.sign(v) * np.maximum(np.abs(v) - thresholds, 0.0)


def _solve_proximal(X, scorer, cfg, costs, mask):
    """Accelerated proximal gradient with a monotone safeguard.

    Every accepted iterate is recorded in the trace and never increases
    the objective; an overshooting accelerated step falls back to a plain
    proximal step from the incumbent, which cannot ascend at step 1/L.
    """
    m, d = X.shape
    direction = np.where(mask, scorer.decision_gradient(), 0.0)
    obj = lambda v: penalized_objective(v, X, scorer, cfg)

    x = np.zeros(d)
    f_x = obj(x)
    trace = [f_x]
    dir_norm_sq = float(direction @ direction)
    if dir_norm_sq <= 0.0:
        return x, f_x, trace

    curvature = 2.0 if cfg.loss == SQUARED_HINGE else 0.25
    lipschitz = cfg.C * curvature * m * dir_norm_sq
    step = cfg.step_size if cfg.step_size is not None else 1.0 / lipschitz
    thresholds = step * costs

    def prox_step(point):
        scores = scorer.decision_function(X + np.where(mask, point, 0.0))
        grad = cfg.C * _loss_slope_sum(scores, scorer, cfg) * direction
        moved = _soft_threshold(point - step * grad, thresholds)
        moved[~mask] = 0.0
        return moved

    y_pt = x
    t = 1.0
    for _ in range(cfg.max_iter):
        z = prox_step(y_pt)
        f_z = obj(z)
        if f_z > f_x:  # acceleration overshot; restart from the incumbent
            z = prox_step(x)
            f_z = obj(z)
            t = 1.0
            if f_z > f_x:  # numerically stuck at the incumbent
                break
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y_pt = z + ((t - 1.0) / t_next) * (z - x)
        change = f_x - f_z
        x, f_x, t = z, f_z, t_next
        trace.append(f_x)
        if change < 1e-9:
            break
    return x, f_x, trace


def _solve_coordinate(X, scorer, cfg, costs, mask):
    """Cyclic per-feature search over the candidate grid.

    Features are visited in index order; candidates in order of weighted
    cost, so ties resolve toward the cheaper move. Stops after a full
    cycle without improvement or ``max_iter`` cycles.
    """
    d = X.shape[1]
    grid = sorted(set(cfg.coord_grid), key=lambda v: (abs(v), v))
    obj = lambda v: penalized_objective(v, X, scorer, cfg)

    delta = np.zeros(d)
    f_cur = obj(delta)
    trace = [f_cur]
    order = np.flatnonzero(mask)
    for _ in range(cfg.max_iter):
        improved = False
        for j in order:
            best_value, best_f = delta[j], f_cur
            for v in grid:
                if v == delta[j]:
                    continue
                candidate = delta.copy()
                candidate[j] = v
                f = obj(candidate)
                if f < best_f - _IMPROVEMENT_EPS:
                    best_value, best_f = v, f
            if best_value != delta[j]:
                delta[j] = best_value
                f_cur = best_f
                trace.append(f_cur)
                improved = True
        if not improved:
            break
    return delta, f_cur, trace


def solve_penalized(D, scorer, cfg: PenalizedConfig) -> GroupDelta:
    """Minimize the penalized objective, dispatching on scorer capability.

    Always returns an intervention (possibly zero) with its flip record;
    the caller decides what a zero-coverage result means.
    """
    X = _instance_matrix(D)
    costs, mask = cfg.resolved(X.shape[1])
    if getattr(scorer, "has_analytic_gradient", False):
        delta, objective, trace = _solve_proximal(X, scorer, cfg, costs, mask)
    else:
        delta, objective, trace = _solve_coordinate(X, scorer, cfg, costs, mask)

    scores = scorer.decision_function(X + np.where(mask, delta, 0.0))
    slacks = np.maximum(0.0, cfg.margin - RETENTION * scores)
    flipped = RETENTION * scores >= 0.0
    return GroupDelta(
        delta=np.where(mask, delta, 0.0),
        objective=float(objective),
        slacks=slacks,
        flipped=flipped,
        mask=mask.copy(),
        can_flip=None,
        objective_trace=tuple(trace),
    )


def with_mask(cfg: PenalizedConfig, mask) -> PenalizedConfig:
    """A copy of ``cfg`` with the feature mask replaced."""
    return replace(cfg, mask=None if mask is None else np.asarray(mask, dtype=bool))
