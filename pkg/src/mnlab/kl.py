"""Kullback-Leibler divergence between equal-mean Gaussians, with bounds.

For ``X ~ N(0, sigma0)`` and ``Y ~ N(0, sigma1)`` the divergence of the
``sigma1`` law from the ``sigma0`` law is

    kl = (1/2) * (-ln det(sigma0^-1 sigma1) + tr(sigma0^-1 sigma1) - n).

When ``C * sigma0 <= sigma1`` in the Loewner order for some ``C`` in
(0, 1], the divergence is dominated by the Frobenius-norm expressions

    kl <= (1/(4C^2)) ||sigma0^-1/2 (sigma1 - sigma0) sigma0^-1/2||_F^2
       <= (1/(4C^2)) ||sigma0^-1 sigma1 - I||_F^2,

which is what makes desk-scale certification of average-divergence
conditions tractable.  Without the Loewner hypothesis a symmetrised
variant still dominates; that variant is verified empirically by the test
suite rather than certified.

All KL quantities are in nats.  Binary logarithms appear only in codeword
counting (see :mod:`mnlab.certificate`).  Products with ``sigma0^-1`` are
always formed via triangular solves against the Cholesky factor, never via
an explicit inverse: the model-3 covariances reach condition numbers of
order n^3 / tau^2 and explicit inverses would ruin the bound comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidC
from .linalg import check_symmetric, cholesky_lower

__all__ = [
    "kl_exact",
    "KLBound",
    "kl_bound",
    "kl_bound_symmetrized",
    "find_loewner_constant",
    "KLReport",
    "kl_report",
]


def _pair(sigma0, sigma1):
    a0 = check_symmetric(sigma0, "sigma0")
    a1 = check_symmetric(sigma1, "sigma1")
    if a0.shape != a1.shape:
        raise DimensionMismatch(f"shapes differ: {a0.shape} vs {a1.shape}")
    return a0, a1


def kl_exact(sigma0, sigma1) -> float:
    """Exact divergence (nats) of ``N(0, sigma1)`` from ``N(0, sigma0)``.

    Both inputs must be positive definite.  Computed from the Cholesky
    factors: log-determinants from the factor diagonals and the trace term
    as ``||L0^-1 L1||_F^2``.  The value is clamped at 0 to absorb rounding
    for near-identical inputs.
    """
    a0, a1 = _pair(sigma0, sigma1)
    n = a0.shape[0]
    low0 = cholesky_lower(a0)
    low1 = cholesky_lower(a1)
    logdet_ratio = 2.0 * (
        np.sum(np.log(np.diag(low1))) - np.sum(np.log(np.diag(low0)))
    )
    w = scipy.linalg.solve_triangular(low0, low1, lower=True)
    trace_term = float(np.sum(w * w))
    return float(max(0.5 * (-logdet_ratio + trace_term - n), 0.0))


class KLBound(NamedTuple):
    """Frobenius-norm divergence bound: loose ``value`` and tighter ``middle``.

    ``value = ||sigma0^-1 sigma1 - I||_F^2 / (4 C^2)`` and ``middle`` is
    the congruence-symmetrised expression
    ``||sigma0^-1/2 (sigma1 - sigma0) sigma0^-1/2||_F^2 / (4 C^2)``;
    ``middle <= value`` always.
    """

    value: float
    middle: float


def kl_bound(sigma0, sigma1, c: float) -> KLBound:
    """Divergence bound valid when ``c * sigma0 <= sigma1``, ``c`` in (0, 1].

    The caller is responsible for the Loewner hypothesis (checkable with
    :func:`mnlab.linalg.loewner_leq` or :func:`find_loewner_constant`);
    this routine only evaluates the two Frobenius expressions.
    """
    if not 0.0 < c <= 1.0:
        raise InvalidC(f"constant must lie in (0, 1], got {c}")
    a0, a1 = _pair(sigma0, sigma1)
    n = a0.shape[0]
    low0 = cholesky_lower(a0)
    cholesky_lower(a1)  # validates positive definiteness of sigma1
    scale = 1.0 / (4.0 * c * c)

    y = scipy.linalg.solve_triangular(low0, a1, lower=True)
    x = scipy.linalg.solve_triangular(low0.T, y, lower=False)  # sigma0^-1 sigma1
    right = float(np.sum((x - np.eye(n)) ** 2))

    d = a1 - a0
    g = scipy.linalg.solve_triangular(low0, d, lower=True)
    g = scipy.linalg.solve_triangular(low0, g.T, lower=True).T  # L0^-1 d L0^-T
    middle = float(np.sum(g * g))

    return KLBound(value=scale * right, middle=scale * middle)


def kl_bound_symmetrized(sigma0, sigma1) -> float:
    """Bound needing only positive definiteness, at the cost of symmetrisation.

    Returns ``||sigma0^-1 sigma1 - I||_F^2 / 4
    + ||sigma1^-1 sigma0 - I||_F^2 / 4``.  Dominance over the exact
    divergence is checked empirically by randomized sweeps, not certified.
    """
    a0, a1 = _pair(sigma0, sigma1)
    n = a0.shape[0]
    eye = np.eye(n)
    low0 = cholesky_lower(a0)
    low1 = cholesky_lower(a1)

    def quarter_norm(low, other):
        y = scipy.linalg.solve_triangular(low, other, lower=True)
        x = scipy.linalg.solve_triangular(low.T, y, lower=False)
        return 0.25 * float(np.sum((x - eye) ** 2))

    return quarter_norm(low0, a1) + quarter_norm(low1, a0)


def find_loewner_constant(sigma0, sigma1) -> float:
    """Largest ``C <= 1`` with ``C * sigma0 <= sigma1``.

    Equals ``min(lambda_min(sigma0^-1/2 sigma1 sigma0^-1/2), 1)``, computed
    as the smallest generalized eigenvalue of the pencil
    ``(sigma1, sigma0)``.  Both inputs must be positive definite.
    """
    a0, a1 = _pair(sigma0, sigma1)
    cholesky_lower(a0)
    cholesky_lower(a1)
    w = scipy.linalg.eigh(a1, b=a0, eigvals_only=True)
    return float(min(w[0], 1.0))


@dataclass(frozen=True)
class KLReport:
    """Exact divergence next to its Frobenius bound for one covariance pair."""

    n: int
    kl_exact: float
    bound_value: float
    loewner_constant_c: float
    bound_holds: bool
    ratio: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kl_exact": self.kl_exact,
            "bound_value": self.bound_value,
            "loewner_constant_c": self.loewner_constant_c,
            "bound_holds": self.bound_holds,
            "ratio": self.ratio,
        }


def kl_report(sigma0, sigma1) -> KLReport:
    """Evaluate exact KL, discover the Loewner constant, and compare."""
    a0, a1 = _pair(sigma0, sigma1)
    c = find_loewner_constant(a0, a1)
    exact = kl_exact(a0, a1)
    bound = kl_bound(a0, a1, c).value
    return KLReport(
        n=a0.shape[0],
        kl_exact=exact,
        bound_value=bound,
        loewner_constant_c=c,
        bound_holds=bool(exact <= bound + 1e-9),
        ratio=0.0 if bound == 0.0 else exact / bound,
    )
