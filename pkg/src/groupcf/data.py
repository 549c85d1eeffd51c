"""CSV loading, feature selection, scaling, re-balancing and splitting.

The expected input is a flat HR table with a header row, one row per
employee: a binary attrition column, a department column and numeric
feature columns (the layout of the public IBM attrition CSV). All solver
mathematics downstream happens on standardized features; the report layer
converts interventions back to original units.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError
from .validation import (
    as_float_matrix,
    check_consistent_rows,
    check_fitted,
    check_signed_labels,
)

ATTRITION = -1
RETENTION = +1

# Standard deviations below this are clamped; the feature is then reported
# as non-actionable because no finite intervention is meaningful on it.
STD_FLOOR = 1e-12

DEFAULT_DEPARTMENT = "Research & Development"
DEFAULT_DEPARTMENT_COLUMN = "Department"
DEFAULT_TARGET_COLUMN = "Attrition"
DEFAULT_ATTRITION_VALUE = "Yes"

# Policy-controllable numeric columns used for intervention search unless
# the caller overrides them.
DEFAULT_FEATURES = (
    "EnvironmentSatisfaction",
    "JobInvolvement",
    "JobSatisfaction",
    "MonthlyIncome",
    "PercentSalaryHike",
    "YearsInCurrentRole",
    "YearsSinceLastPromotion",
    "YearsWithCurrManager",
)


@dataclass(frozen=True)
class RawDataset:
    """Rows of a parsed CSV, values kept as text until extraction."""

    rows: tuple
    columns: tuple

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class FeatureSchema:
    """Names, actionability flags and original-unit scaling statistics."""

    feature_names: tuple
    actionable: np.ndarray
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        d = len(self.feature_names)
        if d < 1:
            raise ValueError("schema needs at least one feature")
        if len(set(self.feature_names)) != d:
            raise ValueError("feature names must be unique")
        object.__setattr__(self, "actionable", np.asarray(self.actionable, dtype=bool))
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=float))
        for name, arr in (("actionable", self.actionable),
                          ("means", self.means), ("stds", self.stds)):
            if arr.shape != (d,):
                raise ValueError(f"{name} must have length {d}, got {arr.shape}")
        if np.any(self.stds < STD_FLOOR):
            raise ValueError(f"stds must be >= {STD_FLOOR}")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def index_of(self, name: str) -> int:
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise DataError(f"unknown feature name: {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "feature_names": list(self.feature_names),
            "actionable": [bool(a) for a in self.actionable],
            "means": [float(m) for m in self.means],
            "stds": [float(s) for s in self.stds],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "FeatureSchema":
        return cls(
            feature_names=tuple(payload["feature_names"]),
            actionable=np.asarray(payload["actionable"], dtype=bool),
            means=np.asarray(payload["means"], dtype=float),
            stds=np.asarray(payload["stds"], dtype=float),
        )


@dataclass(frozen=True)
class PreparedDataset:
    """Standardized feature matrix with -1/+1 labels and its schema."""

    X: np.ndarray
    y: np.ndarray
    schema: FeatureSchema

    def __post_init__(self):
        X = as_float_matrix(self.X, "X")
        y = check_signed_labels(self.y, "y")
        check_consistent_rows(X, y)
        if X.shape[1] != self.schema.n_features:
            raise ValueError("X column count disagrees with the schema")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)


def load_csv(path, expected_columns=None) -> RawDataset:
    """Read a CSV with a header row into a RawDataset.

    Raises DataError for a missing file, a file without a header, a row
    whose field count disagrees with the header, or a missing expected
    column.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty (no header row)") from None
        columns = tuple(name.strip() for name in header)
        if len(set(columns)) != len(columns):
            raise DataError(f"{path}: duplicate column names in header")
        rows = []
        for i, record in enumerate(reader):
            if not record:
                continue  # blank trailing lines
            if len(record) != len(columns):
                raise DataError(
                    f"{path}: data row {i} has {len(record)} fields, "
                    f"expected {len(columns)}"
                )
            rows.append(dict(zip(columns, record)))
    if expected_columns is not None:
        missing = [c for c in expected_columns if c not in columns]
        if missing:
            raise DataError(f"{path}: missing expected columns: {missing}")
    return RawDataset(rows=tuple(rows), columns=columns)


def prepare(
    raw: RawDataset,
    department: str,
    features,
    target_column: str,
    *,
    department_column: str = DEFAULT_DEPARTMENT_COLUMN,
    attrition_value: str = DEFAULT_ATTRITION_VALUE,
):
    """Filter, extract and encode: rows -> (X, y, row_indices).

    Rows are filtered to ``department`` (an empty string disables the
    filter), the feature columns are parsed as reals and the binary target
    is encoded attrition -> -1, retention -> +1. Row order is preserved;
    ``row_indices`` point back into ``raw.rows``. Missing or non-numeric
    values are hard errors naming the row and column.
    """
    features = list(features)
    for name in features + [target_column]:
        if name not in raw.columns:
            raise DataError(f"unknown column: {name!r}")
    if department and department_column not in raw.columns:
        raise DataError(f"unknown column: {department_column!r}")

    target_values = {row[target_column].strip() for row in raw.rows}
    if len(target_values) > 2:
        raise DataError(
            f"target column {target_column!r} has {len(target_values)} distinct "
            f"values, expected two: {sorted(target_values)}"
        )
    if raw.rows and attrition_value not in target_values:
        raise DataError(
            f"attrition value {attrition_value!r} does not occur in column "
            f"{target_column!r} (values: {sorted(target_values)})"
        )

    if department:
        row_indices = [i for i, row in enumerate(raw.rows)
                       if row[department_column].strip() == department]
        if not row_indices:
            raise DataError(
                f"no rows match {department_column} == {department!r}"
            )
    else:
        row_indices = list(range(raw.n_rows))

    X = np.empty((len(row_indices), len(features)), dtype=float)
    y = np.empty(len(row_indices), dtype=int)
    for out_i, raw_i in enumerate(row_indices):
        row = raw.rows[raw_i]
        for j, name in enumerate(features):
            text = row[name].strip()
            if not text:
                raise DataError(f"missing value at data row {raw_i}, column {name!r}")
            try:
                X[out_i, j] = float(text)
            except ValueError:
                raise DataError(
                    f"non-numeric value {text!r} at data row {raw_i}, "
                    f"column {name!r}"
                ) from None
        label = row[target_column].strip()
        y[out_i] = ATTRITION if label == attrition_value else RETENTION
    return X, y, np.asarray(row_indices, dtype=int)


class Standardizer(BaseEstimator, TransformerMixin):
    """Per-column (x - mean) / std scaling with sample (n-1) deviation.

    Constant columns get their std clamped to STD_FLOOR and a warning; the
    schema built from this scaler marks them non-actionable.
    """

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        if X.shape[0] < 2:
            raise ValueError("standardization needs at least 2 rows")
        self.means_ = X.mean(axis=0)
        stds = X.std(axis=0, ddof=1)
        self.constant_ = stds < STD_FLOOR
        if np.any(self.constant_):
            cols = np.flatnonzero(self.constant_).tolist()
            warnings.warn(
                f"constant feature columns {cols}: std clamped to {STD_FLOOR}, "
                "marked non-actionable",
                RuntimeWarning,
                stacklevel=2,
            )
        self.stds_ = np.where(self.constant_, STD_FLOOR, stds)
        return self

    def transform(self, X):
        check_fitted(self, "means_")
        X = as_float_matrix(X)
        return (X - self.means_) / self.stds_

    def inverse_transform(self, X):
        check_fitted(self, "means_")
        X = as_float_matrix(X)
        return X * self.stds_ + self.means_

    def destandardize_delta(self, delta_std):
        """Map an intervention from standardized to original units.

        An intervention is a difference, so only the scale applies; there
        is no mean shift.
        """
        check_fitted(self, "means_")
        delta_std = np.asarray(delta_std, dtype=float)
        return delta_std * self.stds_

    @classmethod
    def from_schema(cls, schema: FeatureSchema) -> "Standardizer":
        scaler = cls()
        scaler.means_ = np.asarray(schema.means, dtype=float)
        scaler.stds_ = np.asarray(schema.stds, dtype=float)
        scaler.constant_ = scaler.stds_ <= STD_FLOOR
        return scaler


def build_schema(feature_names, scaler: Standardizer, actionable=None) -> FeatureSchema:
    """Combine feature names with a fitted scaler into a FeatureSchema.

    Constant columns are always demoted to non-actionable, whatever the
    caller-provided flags say.
    """
    check_fitted(scaler, "means_")
    names = tuple(feature_names)
    if actionable is None:
        flags = np.ones(len(names), dtype=bool)
    else:
        flags = np.asarray(actionable, dtype=bool).copy()
    flags &= ~scaler.constant_
    return FeatureSchema(
        feature_names=names,
        actionable=flags,
        means=scaler.means_.copy(),
        stds=scaler.stds_.copy(),
    )


def undersample_majority(X, y, seed: int):
    """Balance classes by sampling the majority uniformly without replacement.

    Every minority row is kept exactly once; original row order is
    preserved. Deterministic for a fixed seed.
    """
    X = as_float_matrix(X)
    y = check_signed_labels(y)
    check_consistent_rows(X, y)
    idx_neg = np.flatnonzero(y == ATTRITION)
    idx_pos = np.flatnonzero(y == RETENTION)
    if len(idx_neg) == 0 or len(idx_pos) == 0:
        raise DataError("both classes must be present to undersample")
    if len(idx_neg) == len(idx_pos):
        return X.copy(), y.copy()
    minority, majority = (idx_neg, idx_pos) if len(idx_neg) < len(idx_pos) else (idx_pos, idx_neg)
    rng = np.random.default_rng(seed)
    kept_majority = rng.choice(majority, size=len(minority), replace=False)
    keep = np.sort(np.concatenate([minority, kept_majority]))
    return X[keep], y[keep]


@dataclass(frozen=True)
class TrainTestSplit:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    train_indices: np.ndarray
    test_indices: np.ndarray


def train_test_split(X, y, ratio: float, seed: int) -> TrainTestSplit:
    """Disjoint row split with floor(ratio * n) training rows.

    Indices are sorted so each side keeps the original row order;
    deterministic for a fixed seed.
    """
    X = as_float_matrix(X)
    y = check_signed_labels(y)
    check_consistent_rows(X, y)
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(np.floor(ratio * n))
    train_idx = np.sort(perm[:n_train])
    test_idx = np.sort(perm[n_train:])
    return TrainTestSplit(
        X_train=X[train_idx],
        y_train=y[train_idx],
        X_test=X[test_idx],
        y_test=y[test_idx],
        train_indices=train_idx,
        test_indices=test_idx,
    )
