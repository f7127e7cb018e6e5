"""Input validation helpers shared by the estimator and the numeric modules."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def as_label_matrix(y, name: str = "labels") -> np.ndarray:
    """Coerce ``y`` to a 2-D int8 array with every cell in {0, 1}."""
    arr = np.asarray(y)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 values")
    return arr.astype(np.int8, copy=False)


def check_same_shape(a: np.ndarray, b: np.ndarray, a_name: str, b_name: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(
            f"{a_name} has shape {a.shape} but {b_name} has shape {b.shape}"
        )


def check_rows_match(a: np.ndarray, b: np.ndarray, a_name: str, b_name: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise ShapeError(
            f"{a_name} has {a.shape[0]} rows but {b_name} has {b.shape[0]}"
        )
