"""Attrition classifiers behind a single scorer contract.

Both estimators are trained natively and expose ``decision_function``
(real-valued margin, positive means retention) and ``predict`` (sign of
the margin with ties resolved to +1). ``LinearScorer`` additionally
exposes the analytic input gradient of its margin, which selects the
smooth solver path downstream; ``ForestScorer`` is piecewise constant and
selects the derivative-free path.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator

from .data import ATTRITION, RETENTION
from .errors import NothingToExplainError
from .validation import (
    as_float_matrix,
    as_float_vector,
    check_consistent_rows,
    check_fitted,
    check_signed_labels,
)

MODEL_FORMAT_VERSION = 1


def predict_from_scores(scores):
    """Signed labels from margins: +1 where the score is >= 0, else -1."""
    scores = np.asarray(scores, dtype=float)
    return np.where(scores >= 0.0, RETENTION, ATTRITION)


def logistic_loss_gradient(coef, intercept, X, y, l2_strength):
    """Mean logistic loss with an L2 penalty on the weights, and its gradient.

    Returns (loss, grad_coef, grad_intercept). Kept as a module function so
    the analytic gradient can be checked against finite differences.
    """
    coef = as_float_vector(coef, "coef")
    X = as_float_matrix(X)
    y = check_signed_labels(y)
    margins = y * (X @ coef + intercept)
    n = X.shape[0]
    loss = np.mean(np.logaddexp(0.0, -margins)) + 0.5 * l2_strength * coef @ coef
    # d/dm log(1 + exp(-m)) = -sigmoid(-m)
    pull = -y * expit(-margins)
    grad_coef = X.T @ pull / n + l2_strength * coef
    grad_intercept = float(np.mean(pull))
    return float(loss), grad_coef, grad_intercept


class LinearScorer(BaseEstimator):
    """Logistic regression trained by plain full-batch gradient descent.

    Zero initialization and a fixed step from a Lipschitz bound make runs
    bit-reproducible. The margin is ``coef_ . x + intercept_``.
    """

    has_analytic_gradient = True

    def __init__(self, l2_strength=0.01, max_iter=5000, tol=1e-6):
        self.l2_strength = l2_strength
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        X = as_float_matrix(X)
        y = check_signed_labels(y)
        check_consistent_rows(X, y)
        if self.l2_strength < 0:
            raise ValueError("l2_strength must be >= 0")
        if len(np.unique(y)) < 2:
            raise ValueError("training data must contain both classes")
        n, d = X.shape
        Xb = np.hstack([X, np.ones((n, 1))])
        # Gradient Lipschitz bound: sigma_max(Xb)^2 / (4n) for the mean
        # log-loss plus the penalty curvature.
        lipschitz = float(np.linalg.eigvalsh(Xb.T @ Xb)[-1]) / (4.0 * n) + self.l2_strength
        step = 1.0 / lipschitz
        coef = np.zeros(d)
        intercept = 0.0
        grad_norm = np.inf
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            _, g_coef, g_int = logistic_loss_gradient(
                coef, intercept, X, y, self.l2_strength
            )
            grad_norm = max(float(np.max(np.abs(g_coef))), abs(g_int))
            if grad_norm < self.tol:
                break
            coef = coef - step * g_coef
            intercept = intercept - step * g_int
        self.coef_ = coef
        self.intercept_ = float(intercept)
        self.n_iter_ = n_iter
        self.grad_norm_ = grad_norm
        self.converged_ = grad_norm < self.tol
        if not self.converged_:
            warnings.warn(
                f"gradient descent stopped at max_iter={self.max_iter} with "
                f"gradient inf-norm {grad_norm:.3e}",
                RuntimeWarning,
                stacklevel=2,
            )
        return self

    @classmethod
    def from_parameters(cls, coef, intercept) -> "LinearScorer":
        scorer = cls()
        scorer.coef_ = as_float_vector(coef, "coef").copy()
        scorer.intercept_ = float(intercept)
        return scorer

    def decision_function(self, X):
        check_fitted(self, "coef_")
        X = as_float_matrix(X)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        return predict_from_scores(self.decision_function(X))

    def retention_probability(self, X):
        return expit(self.decision_function(X))

    def decision_gradient(self):
        """Gradient of the margin with respect to the input (constant)."""
        check_fitted(self, "coef_")
        return self.coef_.copy()


@dataclass(frozen=True)
class _Tree:
    """Axis-aligned binary tree in flat arrays; feature -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # retention fraction in [0, 1] (meaningful at leaves)

    def apply(self, X):
        node = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            rows = np.flatnonzero(internal)
            at = node[rows]
            go_left = X[rows, self.feature[at]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])
        return self.value[node]


def _gini_best_split(X, y, idx):
    """Best (feature, threshold) by weighted Gini over midpoint candidates.

    Ties keep the first candidate in (feature index, threshold) scan order
    so tree building is deterministic. Returns None when no split improves
    on a leaf.
    """
    n = len(idx)
    labels = (y[idx] == RETENTION).astype(float)
    total_pos = labels.sum()
    parent_gini = 1.0 - (total_pos / n) ** 2 - ((n - total_pos) / n) ** 2
    if parent_gini <= 0.0:
        return None
    best = None  # (score, feature, threshold)
    for j in range(X.shape[1]):
        xs = X[idx, j]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        pos_prefix = np.cumsum(labels[order])
        # split after position k: left = first k+1 rows
        for k in range(n - 1):
            if xs_sorted[k] == xs_sorted[k + 1]:
                continue
            n_left = k + 1
            n_right = n - n_left
            pos_left = pos_prefix[k]
            pos_right = total_pos - pos_left
            gini_left = 1.0 - (pos_left / n_left) ** 2 - ((n_left - pos_left) / n_left) ** 2
            gini_right = 1.0 - (pos_right / n_right) ** 2 - ((n_right - pos_right) / n_right) ** 2
            score = (n_left * gini_left + n_right * gini_right) / n
            if best is None or score < best[0] - 1e-12:
                threshold = 0.5 * (xs_sorted[k] + xs_sorted[k + 1])
                best = (score, j, threshold)
    if best is None or best[0] >= parent_gini - 1e-12:
        return None
    return best[1], best[2]


def _grow_tree(X, y, idx, max_depth):
    feature, threshold, left, right, value = [], [], [], [], []

    def grow(rows, depth):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(np.mean(y[rows] == RETENTION)))
        if depth >= max_depth or len(rows) < 2:
            return node
        split = _gini_best_split(X, y, rows)
        if split is None:
            return node
        j, t = split
        go_left = X[rows, j] <= t
        feature[node] = j
        threshold[node] = t
        left[node] = grow(rows[go_left], depth + 1)
        right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(idx, 0)
    return _Tree(
        feature=np.asarray(feature, dtype=np.intp),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        value=np.asarray(value, dtype=float),
    )


class ForestScorer(BaseEstimator):
    """Bagged CART ensemble; the margin is the mean leaf retention minus 0.5.

    Each tree is grown on a uniform bootstrap drawn from the seed, with
    Gini splits; the score is piecewise constant in the input.
    """

    has_analytic_gradient = False

    def __init__(self, n_trees=25, max_depth=5, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed

    def fit(self, X, y):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        X = as_float_matrix(X)
        y = check_signed_labels(y)
        check_consistent_rows(X, y)
        n = X.shape[0]
        if n < 2:
            raise ValueError("need at least 2 rows to fit")
        rng = np.random.default_rng(self.seed)
        self.trees_ = []
        for _ in range(self.n_trees):
            bootstrap = rng.integers(0, n, size=n)
            self.trees_.append(_grow_tree(X, y, np.sort(bootstrap), self.max_depth))
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_fitted(self, "trees_")
        X = as_float_matrix(X)
        votes = np.zeros(X.shape[0])
        for tree in self.trees_:
            votes += tree.apply(X)
        return votes / len(self.trees_) - 0.5

    def predict(self, X):
        return predict_from_scores(self.decision_function(X))

    def retention_probability(self, X):
        return self.decision_function(X) + 0.5


@dataclass(frozen=True)
class InstanceSet:
    """Standardized rows the classifier labels attrition, with source ids."""

    X: np.ndarray
    row_ids: np.ndarray

    def __post_init__(self):
        X = as_float_matrix(self.X, "X")
        row_ids = np.asarray(self.row_ids, dtype=int)
        if row_ids.shape != (X.shape[0],):
            raise ValueError("row_ids must have one entry per row")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    def check_membership(self, scorer):
        """Re-assert that every row is predicted attrition by ``scorer``."""
        preds = scorer.predict(self.X)
        if np.any(preds != ATTRITION):
            bad = np.flatnonzero(preds != ATTRITION).tolist()
            raise ValueError(f"rows {bad} are not predicted attrition")


def select_attrition_set(scorer, X, row_ids=None) -> InstanceSet:
    """Collect the rows predicted attrition, preserving order.

    Raises NothingToExplainError when the classifier predicts retention
    everywhere, so an empty selection can never pass silently.
    """
    X = as_float_matrix(X)
    if row_ids is None:
        row_ids = np.arange(X.shape[0])
    row_ids = np.asarray(row_ids, dtype=int)
    keep = scorer.predict(X) == ATTRITION
    if not keep.any():
        raise NothingToExplainError(
            "the classifier predicts retention for every row"
        )
    return InstanceSet(X=X[keep], row_ids=row_ids[keep])


def scorer_to_dict(scorer, feature_names=None) -> dict:
    """Serialize a fitted scorer to a versioned JSON-ready dict."""
    payload = {"format_version": MODEL_FORMAT_VERSION}
    if feature_names is not None:
        payload["feature_names"] = list(feature_names)
    if isinstance(scorer, LinearScorer):
        check_fitted(scorer, "coef_")
        payload["kind"] = "linear"
        payload["coef"] = [float(w) for w in scorer.coef_]
        payload["intercept"] = float(scorer.intercept_)
        payload["params"] = {
            "l2_strength": scorer.l2_strength,
            "max_iter": scorer.max_iter,
            "tol": scorer.tol,
        }
    elif isinstance(scorer, ForestScorer):
        check_fitted(scorer, "trees_")
        payload["kind"] = "forest"
        payload["params"] = {
            "n_trees": scorer.n_trees,
            "max_depth": scorer.max_depth,
            "seed": scorer.seed,
        }
        payload["trees"] = [
            {
                "feature": tree.feature.tolist(),
                "threshold": [float(t) for t in tree.threshold],
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "value": [float(v) for v in tree.value],
            }
            for tree in scorer.trees_
        ]
    else:
        raise TypeError(f"cannot serialize scorer of type {type(scorer).__name__}")
    return payload


def scorer_from_dict(payload: dict):
    """Rebuild a scorer from :func:`scorer_to_dict` output."""
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version: {version}")
    kind = payload.get("kind")
    if kind == "linear":
        scorer = LinearScorer(**payload.get("params", {}))
        scorer.coef_ = np.asarray(payload["coef"], dtype=float)
        scorer.intercept_ = float(payload["intercept"])
        return scorer
    if kind == "forest":
        scorer = ForestScorer(**payload.get("params", {}))
        scorer.trees_ = [
            _Tree(
                feature=np.asarray(t["feature"], dtype=np.intp),
                threshold=np.asarray(t["threshold"], dtype=float),
                left=np.asarray(t["left"], dtype=np.intp),
                right=np.asarray(t["right"], dtype=np.intp),
                value=np.asarray(t["value"], dtype=float),
            )
            for t in payload["trees"]
        ]
        scorer.n_features_ = None
        return scorer
    raise ValueError(f"unknown model kind: {kind!r}")


def accuracy(scorer, X, y) -> float:
    y = check_signed_labels(y)
    return float(np.mean(scorer.predict(X) == y))


def tune_logistic(X_train, y_train, X_test, y_test, l2_grid=(0.0, 0.001, 0.01, 0.1)):
    """Pick the l2 strength with the best test accuracy (first best wins)."""
    best = None
    for l2 in l2_grid:
        scorer = LinearScorer(l2_strength=l2).fit(X_train, y_train)
        acc = accuracy(scorer, X_test, y_test)
        if best is None or acc > best[0] + 1e-12:
            best = (acc, scorer)
    return best[1], best[0]


def tune_forest(X_train, y_train, X_test, y_test, seed,
                n_trees_grid=(25,), max_depth_grid=(3, 5, 7)):
    """Pick the forest shape with the best test accuracy (first best wins)."""
    best = None
    for n_trees in n_trees_grid:
        for max_depth in max_depth_grid:
            scorer = ForestScorer(n_trees=n_trees, max_depth=max_depth, seed=seed)
            scorer.fit(X_train, y_train)
            acc = accuracy(scorer, X_test, y_test)
            if best is None or acc > best[0] + 1e-12:
                best = (acc, scorer)
    return best[1], best[0]
