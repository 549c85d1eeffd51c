"""Input-validation helpers used by the estimators and solvers."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError


def as_float_matrix(X, name="X"):
    """Coerce to a finite 2-D float array or raise ValueError."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_float_vector(v, name="v", length=None):
    """Coerce to a finite 1-D float array, optionally of a fixed length."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite values")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {v.shape[0]}")
    return v


def check_signed_labels(y, name="y"):
    """Validate a label vector containing only -1 and +1."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {y.shape}")
    values = set(np.unique(y).tolist())
    if not values <= {-1, 1}:
        raise ValueError(f"{name} must contain only -1/+1 labels, got {sorted(values)}")
    return y.astype(int)


def check_consistent_rows(X, y, x_name="X", y_name="y"):
    if X.shape[0] != y.shape[0]:
        raise ValueError(
            f"{x_name} and {y_name} disagree on the number of rows: "
            f"{X.shape[0]} vs {y.shape[0]}"
        )


def check_fitted(estimator, attribute):
    """Raise NotFittedError unless ``estimator`` carries ``attribute``."""
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )


def as_bool_mask(mask, length, name="mask"):
    """Coerce to a boolean per-feature mask (True = feature may change)."""
    if mask is None:
        return np.ones(length, dtype=bool)
    mask = np.asarray(mask)
    if mask.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {mask.shape}")
    return mask.astype(bool)
