"""Input validation helpers shared by the estimators and the pipeline."""

from __future__ import annotations

import numpy as np


def check_feature_matrix(X, min_rows: int = 1) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise ValueError(f"need at least {min_rows} rows, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise ValueError("feature matrix needs at least one column")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    return X


def check_class_labels(y, n_rows: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {y.shape}")
    if not np.issubdtype(y.dtype, np.integer):
        if np.issubdtype(y.dtype, np.floating) and np.all(y == y.astype(np.int64)):
            y = y.astype(np.int64)
        else:
            raise ValueError("labels must be integers")
    y = y.astype(np.int64)
    if n_rows is not None and y.shape[0] != n_rows:
        raise ValueError(f"expected {n_rows} labels, got {y.shape[0]}")
    if y.size and y.min() < 0:
        raise ValueError("labels must be non-negative")
    return y


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    iv = int(value)
    if iv != value or iv < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return iv
