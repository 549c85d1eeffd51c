"""Exact intervention search for linear classifiers via linear programming.

For a linear margin ``coef . x + intercept`` the search for one shared
intervention minimizing a weighted 1-norm plus per-instance violation
slacks is a plain LP: the intervention is split into positive and negative
parts and one slack variable is attached to every instance, so the program
is always feasible. Masked (black-listed) features contribute no variables
at all, which forces them to exactly zero in any solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import SolverError
from .solution import GroupDelta
from .validation import as_bool_mask, as_float_matrix, as_float_vector

DEFAULT_MARGIN = 1e-4


@dataclass(frozen=True)
class GroupLpProblem:
    """One shared-intervention LP instance for a linear classifier.

    ``C`` prices per-instance slack against intervention cost;
    ``feature_costs`` are the weights of the 1-norm (all ones by default);
    ``mask`` is True where a feature may change; ``margin`` is the strict
    score threshold a flip must clear.
    """

    coef: np.ndarray
    intercept: float
    X: np.ndarray
    C: float
    target_label: int = 1
    feature_costs: np.ndarray | None = None
    mask: np.ndarray | None = None
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        coef = as_float_vector(self.coef, "coef")
        X = as_float_matrix(self.X, "X")
        if X.shape[1] != coef.shape[0]:
            raise ValueError("X and coef disagree on the feature count")
        if self.target_label not in (-1, 1):
            raise ValueError("target_label must be -1 or +1")
        if self.C < 0:
            raise ValueError("C must be >= 0")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        costs = (np.ones(coef.shape[0]) if self.feature_costs is None
                 else as_float_vector(self.feature_costs, "feature_costs", coef.shape[0]))
        if np.any(costs <= 0):
            raise ValueError("feature_costs must be strictly positive")
        mask = as_bool_mask(self.mask, coef.shape[0])
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "feature_costs", costs)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.coef.shape[0]


@dataclass(frozen=True)
class GroupLpStandardForm:
    """min c.z s.t. A_ub z <= b_ub, z >= 0.

    Variable layout: [delta_plus (n_active), delta_minus (n_active),
    slack (n_instances)], where ``active_features`` maps the first two
    blocks back to feature indices.
    """

    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    active_features: np.ndarray
    n_instances: int


def build_group_lp(problem: GroupLpProblem) -> GroupLpStandardForm:
    """Assemble the standard-form LP for a problem instance.

    Per instance i the flip constraint is
    ``y * (coef . delta) >= margin - slack_i - y * (coef . x_i + intercept)``
    which lands in A_ub z <= b_ub as
    ``-y*w_a . dp + y*w_a . dn - slack_i <= y*score_i - margin``.
    """
    active = np.flatnonzero(problem.mask)
    m = problem.n_instances
    y = float(problem.target_label)
    w_active = problem.coef[active]
    n_a = len(active)

    c = np.concatenate([
        problem.feature_costs[active],
        problem.feature_costs[active],
        np.full(m, problem.C),
    ])
    A_ub = np.zeros((m, 2 * n_a + m))
    A_ub[:, :n_a] = -y * w_active
    A_ub[:, n_a:2 * n_a] = y * w_active
    A_ub[:, 2 * n_a:] = -np.eye(m)
    scores = problem.X @ problem.coef + problem.intercept
    b_ub = y * scores - problem.margin
    return GroupLpStandardForm(
        c=c, A_ub=A_ub, b_ub=b_ub, active_features=active, n_instances=m
    )


def solve_group_lp(problem: GroupLpProblem) -> GroupDelta:
    """Solve the LP to optimality and return the intervention record.

    Slacks are canonicalized to the margin deficit implied by the returned
    intervention, so the recorded objective is exactly the problem
    objective at ``delta`` (this also pins down the degenerate C = 0 case,
    where the LP leaves slacks unconstrained from above).
    """
    form = build_group_lp(problem)
    result = linprog(
        form.c,
        A_ub=form.A_ub,
        b_ub=form.b_ub,
        bounds=(0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    if not result.success:
        raise SolverError(
            f"LP solve failed (status {result.status}: {result.message}) for "
            f"{form.n_instances} instances x {len(form.active_features)} active "
            f"features"
        )
    n_a = len(form.active_features)
    delta = np.zeros(problem.n_features)
    delta[form.active_features] = result.x[:n_a] - result.x[n_a:2 * n_a]

    y = float(problem.target_label)
    scores_after = problem.X @ problem.coef + problem.intercept + problem.coef @ delta
    slacks = np.maximum(0.0, problem.margin - y * scores_after)
    objective = float(problem.feature_costs @ np.abs(delta) + problem.C * slacks.sum())
    flipped = y * scores_after >= 0.0
    can_flip = bool(np.any(problem.mask & (problem.coef != 0.0)))
    return GroupDelta(
        delta=delta,
        objective=objective,
        slacks=slacks,
        flipped=flipped,
        mask=problem.mask.copy(),
        can_flip=can_flip,
        objective_trace=(objective,),
    )
