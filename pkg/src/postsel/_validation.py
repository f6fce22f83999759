"""Input checks shared by the estimator classes."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_X_y

from .data_io import Dataset


def feature_names_of(X, feature_names=None):
    if feature_names is not None:
        return [str(n) for n in feature_names]
    cols = getattr(X, "columns", None)
    if cols is not None:
        return [str(c) for c in cols]
    return [f"x{j}" for j in range(np.shape(X)[1])]


def as_dataset(X, y, feature_names=None, min_extra_rows=2) -> Dataset:
    """Validate ``X, y`` (finite, 2-D/1-D, matching rows) and wrap them."""
    names = feature_names_of(X, feature_names)
    X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True,
                     ensure_min_samples=min_extra_rows + 1)
    return Dataset.from_arrays(X, y, names)


def check_predict_input(X, n_features):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} features, expected {n_features}")
    return X
