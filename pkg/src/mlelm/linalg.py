"""Dense linear algebra kernels for the normal-equations training path.

Everything here operates on plain 2-D float64 numpy arrays (row-major).
The heavy lifting is delegated to BLAS/LAPACK through numpy and scipy;
this module adds the contracts the rest of the package relies on: shape
checking, finiteness checking, and explicit singularity detection with a
testable pivot threshold.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ._validation import as_matrix
from .errors import ShapeError, SingularMatrixError

# A Cholesky pivot this far below the largest pivot marks the matrix as
# numerically singular.
PIVOT_RTOL = 1e-12


def matmul(a, b) -> np.ndarray:
    """Matrix product ``a @ b`` with shape validation."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def transpose(a) -> np.ndarray:
    """Transpose, returned as a new contiguous array."""
    return np.ascontiguousarray(as_matrix(a, "a").T)


def solve_spd(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric positive-definite ``a``.

    Uses a Cholesky factorization and rejects the input when the
    factorization fails or any pivot falls below ``PIVOT_RTOL`` times the
    largest pivot, so near-singular systems fail loudly instead of
    returning garbage.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"a must be square, got {a.shape[0]}x{a.shape[1]}")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"a is {a.shape[0]}x{a.shape[1]} but b has {b.shape[0]} rows")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"matrix is not positive definite: {exc}") from None
    pivots = np.diagonal(factor[0]) ** 2
    if pivots.min() < PIVOT_RTOL * pivots.max():
        raise SingularMatrixError(
            "matrix is numerically singular "
            f"(pivot ratio {pivots.min() / pivots.max():.3e} below {PIVOT_RTOL:g})"
        )
    return scipy.linalg.cho_solve(factor, b, check_finite=False)


def pseudoinverse(h, ridge: float | None = None) -> np.ndarray:
    """Regularized Moore-Penrose pseudoinverse via the normal equations.

    For a tall ``h`` (rows >= cols) this is ``(h.T h + ridge I)^-1 h.T``;
    for a wide ``h`` the smaller Gram matrix is factored instead,
    ``h.T (h h.T + ridge I)^-1``, which yields the minimum-norm solution
    when used on an underdetermined least-squares problem.

    Parameters
    ----------
    h : array-like, shape (n, m), nonempty
    ridge : float or None
        Nonnegative regularization added to the Gram diagonal. ``None``
        picks a small relative default, 1e-8 times the mean diagonal of
        the Gram matrix. ``0.0`` computes the exact unregularized formula
        and raises :class:`SingularMatrixError` when the Gram matrix is
        numerically singular.
    """
    h = as_matrix(h, "h")
    if h.size == 0:
        raise ShapeError("h must be nonempty")
    if ridge is not None and ridge < 0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")
    tall = h.shape[0] >= h.shape[1]
    gram = h.T @ h if tall else h @ h.T
    n = gram.shape[0]
    if ridge is None:
        ridge = 1e-8 * float(np.trace(gram)) / n
    if ridge > 0.0:
        gram = gram + ridge * np.eye(n)
    try:
        if tall:
            return solve_spd(gram, h.T)
        return transpose(solve_spd(gram, h))
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"Gram matrix is singular ({exc}); supply ridge > 0 to regularize"
        ) from None
