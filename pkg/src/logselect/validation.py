"""Input-validation helpers shared by the estimators.

Selectors and the booster accept a FeatureMatrix, a scipy sparse
matrix, or a plain 2-D array for X, and a LabelVector or boolean/0-1
array for y. These helpers normalise everything to dense ndarrays.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .errors import LengthMismatch, SingleClassLabels, ValidationError


def as_array(X) -> np.ndarray:
    """Normalise X to a 2-D float64 ndarray (no copy when already one)."""
    from .features import FeatureMatrix

    if isinstance(X, FeatureMatrix):
        arr = X.dense()
    elif sparse.issparse(X):
        arr = np.asarray(X.todense())
    else:
        arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValidationError(f"X must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.float64:
        arr = arr.astype(np.float64)
    return arr


def as_label_array(y) -> np.ndarray:
    """Normalise labels to a boolean 1-D ndarray."""
    from .eventlog import LabelVector

    if isinstance(y, LabelVector):
        return y.values
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValidationError(f"labels must be 1-D, got shape {arr.shape}")
    if arr.dtype != bool:
        bad = ~np.isin(arr, (0, 1))
        if bad.any():
            raise ValidationError("labels must be boolean or 0/1 values")
        arr = arr.astype(bool)
    return arr


def check_X_y(X, y) -> tuple[np.ndarray, np.ndarray]:
    Xa = as_array(X)
    ya = as_label_array(y)
    if Xa.shape[0] != ya.shape[0]:
        raise LengthMismatch(Xa.shape[0], ya.shape[0])
    return Xa, ya


def check_two_classes(y: np.ndarray) -> None:
    if y.size == 0 or bool(y.all()) or not bool(y.any()):
        raise SingleClassLabels()
