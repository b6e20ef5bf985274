"""Dense symmetric linear algebra used by every other module.

Symmetric matrices are plain float64 ``numpy`` arrays whose symmetry is
bit-exact.  Use :func:`sym` to build one (it mirrors the lower triangle);
every operation here validates that invariant on entry and raises rather
than silently symmetrising.  All routines are deterministic pure functions
of their inputs, so results are reproducible bit for bit and safe to use
from multiple threads.

Factorisations and eigendecompositions are delegated to LAPACK (via
numpy/scipy), which at the desk scales targeted here (n <= 4096) is both
faster and more robust than anything hand-rolled.  Failure modes are
translated into the package's exception types.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite

__all__ = [
    "sym",
    "check_symmetric",
    "EigenResult",
    "cholesky_lower",
    "sym_eigen",
    "frobenius_norm",
    "is_psd",
    "loewner_leq",
    "solve_spd",
]


def sym(a) -> np.ndarray:
    """Return a bit-exactly symmetric copy of ``a``.

    The lower triangle (i >= j) is authoritative; the upper triangle is
    overwritten with its mirror image so that ``out[i, j] == out[j, i]``
    holds exactly, not merely up to rounding.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return np.tril(a) + np.tril(a, -1).T


def check_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is square with bit-exact symmetry."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] == 0:
        raise DimensionMismatch(f"{name} must have size >= 1")
    if not np.array_equal(a, a.T):
        raise ValueError(f"{name} is not exactly symmetric; build it with sym()")
    return np.ascontiguousarray(a)


@dataclass(frozen=True)
class EigenResult:
    """Full symmetric eigendecomposition.

    ``values`` are sorted descending (largest first); column ``i`` of
    ``vectors`` is the unit eigenvector paired with ``values[i]``.
    """

    values: np.ndarray
    vectors: np.ndarray


def cholesky_lower(m) -> np.ndarray:
    """Lower-triangular Cholesky factor ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot fails, or a computed pivot is at or below
        ``n * eps * max(diag)`` (matrices that close to singular are
        treated as not positive definite).  The exception carries the
        0-based failing pivot index.
    """
    a = check_symmetric(m)
    n = a.shape[0]
    c, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (pivot {info - 1} <= 0)",
            pivot=int(info - 1),
        )
    if info < 0:
        raise ValueError(f"illegal argument {-info} passed to dpotrf")
    max_diag = float(np.max(np.diag(a)))
    threshold = n * np.finfo(float).eps * max(max_diag, 0.0)
    pivots_sq = np.diag(c) ** 2
    bad = np.nonzero(pivots_sq <= threshold)[0]
    if bad.size:
        raise NotPositiveDefinite(
            f"pivot {bad[0]} fell below the singularity threshold "
            f"({pivots_sq[bad[0]]:.3e} <= {threshold:.3e})",
            pivot=int(bad[0]),
        )
    return c


def sym_eigen(m, tol: float = 1e-10) -> EigenResult:
    """Eigendecomposition of a symmetric matrix, values sorted descending.

    ``tol`` is the residual tolerance the result is expected to satisfy
    (relative to the Frobenius norm); LAPACK routinely delivers far
    better.  A convergence failure inside LAPACK is reported as
    :class:`NoConvergence`.
    """
    a = check_symmetric(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NoConvergence(f"eigensolver did not converge: {exc}") from exc
    return EigenResult(values=w[::-1].copy(), vectors=v[:, ::-1].copy())


def frobenius_norm(m) -> float:
    """Square root of the sum of squared entries (any rectangular matrix)."""
    a = np.asarray(m, dtype=float)
    return float(np.sqrt(np.sum(a * a)))


def is_psd(m, tol: float = 1e-9) -> bool:
    """Whether ``lambda_min(m) >= -tol * ||m||_F``.

    Decided by a shifted Cholesky attempt with an eigenvalue fallback on
    the boundary, so the answer is deterministic for a fixed input.  The
    tolerance is relative to the Frobenius norm because the covariances
    handled here span magnitudes from O(n^-3) to O(1).
    """
    a = check_symmetric(m)
    fro = frobenius_norm(a)
    if fro == 0.0:
        return True
    shift = tol * fro
    shifted = a + shift * np.eye(a.shape[0])
    _, info = lapack.dpotrf(shifted, lower=1, clean=0, overwrite_a=1)
    if info == 0:
        return True
    lam_min = float(np.linalg.eigvalsh(a)[0])
    return lam_min >= -shift


def loewner_leq(lo, hi, tol: float = 1e-9) -> bool:
    """Whether ``lo <= hi`` in the Loewner (PSD) order, i.e. hi - lo is PSD."""
    a = check_symmetric(lo, "lo")
    b = check_symmetric(hi, "hi")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return is_psd(b - a, tol=tol)


def solve_spd(m, b) -> np.ndarray:
    """Solve ``m @ x = b`` for symmetric positive definite ``m``.

    ``b`` may be a vector or a matrix of right-hand sides.  Uses the
    Cholesky factor with two triangular solves; never forms an inverse.
    """
    low = cholesky_lower(m)
    rhs = np.asarray(b, dtype=float)
    if rhs.shape[0] != low.shape[0]:
        raise DimensionMismatch(
            f"rhs has {rhs.shape[0]} rows, matrix has {low.shape[0]}"
        )
    y = solve_triangular(low, rhs, lower=True)
    return solve_triangular(low.T, y, lower=False)
