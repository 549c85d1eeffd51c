"""Feature-disjoint alternative interventions via iterative black-listing.

Each round solves the masked group-intervention problem, then every
feature the returned intervention actually uses is added to a black-list
before the next round, so successive interventions touch disjoint feature
sets. A round that flips nobody, or changes nothing, ends the loop early
with an explicit reason instead of producing duplicates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import penalized as _penalized
from .errors import DataError
from .lp import DEFAULT_MARGIN, GroupLpProblem, solve_group_lp
from .models import select_attrition_set
from .validation import check_fitted

# Coordinates at or below this magnitude do not count as "used": LP basic
# solutions and soft-thresholding both make an exact-zero test unreliable
# at floating point.
SUPPORT_TOL = 1e-8

COMPLETED_K = "completed-k"
INFEASIBLE = "infeasible"
ZERO_DELTA = "zero-delta"


def support(delta, tol: float = SUPPORT_TOL) -> set:
    """Indices of coordinates with magnitude above ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be > 0")
    delta = np.asarray(delta, dtype=float)
    return set(np.flatnonzero(np.abs(delta) > tol).tolist())


@dataclass(frozen=True)
class Blacklist:
    """Feature indices forbidden from change."""

    feature_indices: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self, "feature_indices", frozenset(int(j) for j in self.feature_indices)
        )
        if any(j < 0 for j in self.feature_indices):
            raise ValueError("feature indices must be non-negative")

    def check_bounds(self, n_features: int):
        bad = [j for j in self.feature_indices if j >= n_features]
        if bad:
            raise ValueError(f"black-listed indices out of range: {sorted(bad)}")

    def union(self, indices) -> "Blacklist":
        return Blacklist(self.feature_indices | set(indices))

    def to_mask(self, n_features: int) -> np.ndarray:
        """Boolean per-feature mask, True where a feature may change."""
        self.check_bounds(n_features)
        mask = np.ones(n_features, dtype=bool)
        mask[sorted(self.feature_indices)] = False
        return mask

    @classmethod
    def from_feature_names(cls, names, feature_names) -> "Blacklist":
        feature_names = list(feature_names)
        indices = set()
        for name in names:
            if name not in feature_names:
                raise DataError(f"unknown feature name in blacklist: {name!r}")
            indices.add(feature_names.index(name))
        return cls(frozenset(indices))


@dataclass(frozen=True)
class ExplanationSet:
    """Ordered interventions with disjoint supports and the final black-list."""

    deltas: tuple
    final_blacklist: Blacklist
    termination: str

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(self.deltas))
        if self.termination not in (COMPLETED_K, INFEASIBLE, ZERO_DELTA):
            raise ValueError(f"unknown termination reason: {self.termination!r}")

    def supports(self, tol: float = SUPPORT_TOL):
        return [support(d.delta, tol) for d in self.deltas]

    def check_disjoint(self, tol: float = SUPPORT_TOL):
        seen = set()
        for i, sup in enumerate(self.supports(tol)):
            overlap = seen & sup
            if overlap:
                raise ValueError(
                    f"intervention {i} reuses features {sorted(overlap)}"
                )
            seen |= sup


def diverse_explanations(
    instance_set,
    scorer,
    k: int,
    solver,
    tol: float = SUPPORT_TOL,
    initial_blacklist: Blacklist | None = None,
) -> ExplanationSet:
    """Run up to ``k`` rounds of solve-then-black-list.

    ``solver(instance_set, scorer, mask)`` must return a GroupDelta whose
    coordinates are zero wherever ``mask`` is False. A round whose result
    flips no instance, or uses no feature, stops the loop: "infeasible"
    when no permitted change can flip anything, "zero-delta" when the
    solver simply chose not to move.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    d = instance_set.X.shape[1]
    blacklist = initial_blacklist or Blacklist()
    blacklist.check_bounds(d)

    deltas = []
    termination = COMPLETED_K
    for _ in range(k):
        mask = blacklist.to_mask(d)
        delta = solver(instance_set, scorer, mask)
        sup = support(delta.delta, tol)
        if delta.coverage <= 0.0 or not sup:
            if delta.can_flip is False:
                termination = INFEASIBLE
            elif not sup:
                termination = ZERO_DELTA
            else:  # moved, but nobody flipped
                termination = INFEASIBLE
            break
        deltas.append(delta)
        blacklist = blacklist.union(sup)
    result = ExplanationSet(
        deltas=tuple(deltas), final_blacklist=blacklist, termination=termination
    )
    result.check_disjoint(tol)
    return result


def make_lp_solver(C: float, margin: float = DEFAULT_MARGIN, feature_costs=None):
    """Masked-solve closure for linear scorers, backed by the exact LP."""

    def solver(instance_set, scorer, mask):
        problem = GroupLpProblem(
            coef=scorer.coef_,
            intercept=scorer.intercept_,
            X=instance_set.X,
            C=C,
            feature_costs=feature_costs,
            mask=mask,
            margin=margin,
        )
        return solve_group_lp(problem)

    return solver


def make_penalized_solver(cfg: _penalized.PenalizedConfig):
    """Masked-solve closure for arbitrary scorers (gradient or grid path)."""

    def solver(instance_set, scorer, mask):
        return _penalized.solve_penalized(
            instance_set, scorer, _penalized.with_mask(cfg, mask)
        )

    return solver


class DiverseGroupExplainer(BaseEstimator):
    """Estimator-style front end: fit on a feature matrix, read explanations.

    The model goes in the constructor like any meta-estimator; ``fit``
    selects the rows the model labels attrition and computes up to ``k``
    feature-disjoint interventions. Results land in ``explanations_``,
    ``deltas_`` and ``termination_``.
    """

    def __init__(self, model, k=3, C=1.0, margin=DEFAULT_MARGIN,
                 feature_costs=None, blacklist=None, support_tol=SUPPORT_TOL,
                 solver="auto", penalized_config=None):
        self.model = model
        self.k = k
        self.C = C
        self.margin = margin
        self.feature_costs = feature_costs
        self.blacklist = blacklist
        self.support_tol = support_tol
        self.solver = solver
        self.penalized_config = penalized_config

    def _make_solver(self):
        kind = self.solver
        if kind == "auto":
            kind = "lp" if getattr(self.model, "has_analytic_gradient", False) else "penalized"
        if kind == "lp":
            return make_lp_solver(self.C, self.margin, self.feature_costs)
        if kind == "penalized":
            cfg = self.penalized_config or _penalized.PenalizedConfig(
                C=self.C, margin=self.margin, feature_costs=self.feature_costs
            )
            return make_penalized_solver(cfg)
        raise ValueError(f"unknown solver: {self.solver!r}")

    def fit(self, X, y=None):
        instance_set = select_attrition_set(self.model, X)
        initial = Blacklist(frozenset(self.blacklist)) if self.blacklist else Blacklist()
        self.instance_set_ = instance_set
        self.explanations_ = diverse_explanations(
            instance_set,
            self.model,
            self.k,
            self._make_solver(),
            tol=self.support_tol,
            initial_blacklist=initial,
        )
        self.deltas_ = [d.delta.copy() for d in self.explanations_.deltas]
        self.termination_ = self.explanations_.termination
        return self

    def explanation_set(self) -> ExplanationSet:
        check_fitted(self, "explanations_")
        return self.explanations_
