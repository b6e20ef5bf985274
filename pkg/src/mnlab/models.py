"""Exact covariance matrices for the noisy volatility observation models.

Four observation schemes over the grid ``t_i = i/n`` share the form
"latent Gaussian signal plus independent N(0, tau^2) noise":

* ``m1``: the diffusion itself, ``integral_0^{t_i} sigma dW + tau eps_i``;
* ``m2``: scaled Brownian motion, ``sigma(t_i) W_{t_i} + tau eps_i``;
* ``m3``: the time-integrated diffusion plus noise;
* ``mq``: the generalisation with Volterra kernel ``(t - s)^q`` (``q = 0``
  reproduces m1, ``q = 1`` reproduces m3); fractional ``q`` is exploratory
  and priced at one adaptive quadrature per entry.

Raw covariances come straight from the Ito isometry with all weighted
integrals of ``sigma^2`` answered by the profile (closed form where the
profile allows, quadrature otherwise).  Differenced covariances - first
differences for m1/m2, second differences for m3 - are assembled directly
from the differenced stochastic representation: each entry is a sum of
short-interval integrals evaluated in shifted coordinates, so entries of
size O(n^-3) keep full relative precision.  Conjugating the raw matrix
with the differencing matrix gives the same result in exact arithmetic
but loses ~n^3 * eps relative accuracy to cancellation; the test-suite
checks the two routes against each other at an absolute tolerance.

Structured identities (the ``(1/n) I + tau^2 A`` form of the differenced
m1/m2 null covariance; the m3 decomposition over A, V1, A^2 + V2) are
cross-checks only, never the source of truth.  Note the known corner
quirk: the m3 reference decomposition disagrees with the exact covariance
at entry (1, 1) by exactly ``1/(6 n^3)`` in the signal part; consumers
compare away from that corner and report the discrepancy.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .errors import DimensionMismatch, InvalidDifferencing, InvalidProfile
from .linalg import sym
from .profiles import VolatilityProfile
from .structures import matrix_a, matrix_v1

__all__ = [
    "ModelSpec",
    "cov_raw",
    "diff_matrix",
    "cov_differenced",
    "Model2Decomposition",
    "model2_decomposition",
    "extract_v2",
    "second_diff_noise_gram",
    "model3_reference_decomposition",
    "matrix_to_csv",
    "covariance_descriptor",
    "write_covariance_bundle",
]

_MODELS = ("m1", "m2", "m3", "mq")
_DIFFERENCING = ("none", "first", "second")


@dataclass(frozen=True)
class ModelSpec:
    """Which observation model, at which size, noise level and differencing."""

    model: str
    n: int
    tau: float
    q: float | None = None
    differencing: str = "none"

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.tau < 0.0:
            raise ValueError("tau must be >= 0")
        if self.differencing not in _DIFFERENCING:
            raise InvalidDifferencing(
                f"differencing must be one of {_DIFFERENCING}"
            )
        if self.differencing == "second" and self.model != "m3":
            raise InvalidDifferencing("second differences apply to model m3 only")
        if self.differencing != "none" and self.n < 2:
            raise ValueError("differencing needs n >= 2")
        if self.model == "mq":
            if self.q is None or self.q < 0.0:
                raise ValueError("model mq needs q >= 0")
        elif self.q is not None:
            raise ValueError("q is only meaningful for model mq")


def _probe_profile(profile: VolatilityProfile, n: int) -> None:
    grid = np.concatenate([np.arange(1, n + 1) / n, (np.arange(n) + 0.5) / n])
    values = np.asarray(profile.eval(grid), dtype=float)
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise InvalidProfile("profile must be strictly positive and finite")


def _cumulative_moments(profile: VolatilityProfile, n: int, powers) -> dict:
    """``integral_0^{k/n} u^p sigma^2 du`` for k = 0..n, per requested power.

    Closed-form profiles are evaluated directly at each grid point (exact);
    anything else is integrated interval by interval and accumulated, which
    keeps the number of quadratures proportional to the support actually
    covered.
    """
    grid = np.arange(n + 1) / n
    out = {}
    direct = profile.kind in ("constant", "piecewise")
    for p in powers:
        vals = np.empty(n + 1)
        vals[0] = 0.0
        if direct:
            for k in range(1, n + 1):
                vals[k] = profile.moment_integral(p, 0.0, grid[k])
        else:
            increments = [
                profile.moment_integral(p, grid[k - 1], grid[k])
                for k in range(1, n + 1)
            ]
            vals[1:] = np.cumsum(increments)
        out[p] = vals
    return out


def cov_raw(spec: ModelSpec, profile: VolatilityProfile) -> np.ndarray:
    """Covariance of the raw (undifferenced) observation vector."""
    if spec.differencing != "none":
        raise InvalidDifferencing("cov_raw expects differencing='none'")
    _probe_profile(profile, spec.n)
    n, tau = spec.n, spec.tau
    noise = tau * tau * np.eye(n)
    idx = np.arange(n)
    min_idx = np.minimum.outer(idx, idx) + 1  # min(i, j), 1-based
    t = np.arange(1, n + 1) / n

    if spec.model == "m1":
        mom = _cumulative_moments(profile, n, (0,))
        return sym(mom[0][min_idx] + noise)

    if spec.model == "m2":
        s = np.sqrt(np.asarray(profile.eval(t), dtype=float))
        return sym(np.outer(s, s) * (min_idx / n) + noise)

    if spec.model == "m3":
        mom = _cumulative_moments(profile, n, (0, 1, 2))
        signal = (
            np.outer(t, t) * mom[0][min_idx]
            - np.add.outer(t, t) * mom[1][min_idx]
            + mom[2][min_idx]
        )
        return sym(signal + noise)

    # mq
    q = spec.q
    if q is not None and float(q).is_integer():
        qi = int(round(q))
        mom = _cumulative_moments(profile, n, tuple(range(2 * qi + 1)))
        signal = np.zeros((n, n))
        for r in range(qi + 1):
            for s_ in range(qi + 1):
                coef = math.comb(qi, r) * math.comb(qi, s_) * (-1.0) ** (r + s_)
                signal += coef * np.outer(t ** (qi - r), t ** (qi - s_)) * mom[r + s_][min_idx]
        return sym(signal + noise)

    if n > 512:
        raise ValueError(
            "fractional-q covariances run one quadrature per entry; "
            "n > 512 is not supported"
        )
    signal = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            s_min = t[min(i, j)]
            ti, tj = t[i], t[j]

            def integrand(u, ti=ti, tj=tj):
                return (ti - u) ** q * (tj - u) ** q * float(profile.eval(u))

            val, _ = quad(
                integrand, 0.0, s_min,
                points=[p for p in profile.breakpoints if 0.0 < p < s_min] or None,
                epsabs=1e-13, epsrel=1e-11, limit=200,
            )
            signal[i, j] = signal[j, i] = val
    return sym(signal + noise)


def diff_matrix(spec: ModelSpec) -> np.ndarray:
    """The differencing transform ``D`` as a dense invertible matrix.

    First differences: row i is ``e_i - e_{i-1}`` (row 1 is ``e_1``).
    Second differences: row 1 is ``sqrt(2) e_1``, row 2 encodes
    ``y_2 - 2 y_1`` and row i >= 3 encodes ``y_i - 2 y_{i-1} + y_{i-2}``.
    """
    n = spec.n
    if spec.differencing == "first":
        return np.eye(n) - np.eye(n, k=-1)
    if spec.differencing == "second":
        d = np.eye(n) - 2.0 * np.eye(n, k=-1) + np.eye(n, k=-2)
        d[0, 0] = math.sqrt(2.0)
        if n >= 2:
            d[1, 0] = -2.0
        return d
    raise InvalidDifferencing("diff_matrix needs differencing 'first' or 'second'")


def _conjugate_first(m: np.ndarray) -> np.ndarray:
    r = m.copy()
    r[1:] -= m[:-1]
    out = r.T.copy()
    out[1:] -= r.T[:-1]
    return sym(out.T)


def _conjugate_second(m: np.ndarray) -> np.ndarray:
    def rows(x):
        r = np.empty_like(x)
        r[0] = math.sqrt(2.0) * x[0]
        r[1] = x[1] - 2.0 * x[0]
        if x.shape[0] > 2:
            r[2:] = x[2:] - 2.0 * x[1:-1] + x[:-2]
        return r

    return sym(rows(rows(m).T).T)


def second_diff_noise_gram(n: int) -> np.ndarray:
    """Gram matrix ``D2 @ D2.T`` of the second-difference transform.

    Pentadiagonal; equals ``A^2 + V2`` in the m3 covariance decomposition.
    Built from closed-form band values, no matrix product.
    """
    g = np.zeros((n, n))
    rt2 = math.sqrt(2.0)
    for i in range(n):
        g[i, i] = 2.0 if i == 0 else (5.0 if i == 1 else 6.0)
    for i in range(n - 1):
        off = -2.0 * rt2 if i == 0 else -4.0
        g[i, i + 1] = g[i + 1, i] = off
    for i in range(n - 2):
        off = rt2 if i == 0 else 1.0
        g[i, i + 2] = g[i + 2, i] = off
    if n == 1:
        g[0, 0] = 2.0
    return g


def cov_differenced(spec: ModelSpec, profile: VolatilityProfile) -> np.ndarray:
    """Covariance of the differenced observations ``D @ Y``.

    Mathematically equal to ``D @ cov_raw @ D.T``; computed from the
    differenced representation so small entries keep relative precision
    (see module docstring).
    """
    if spec.differencing not in ("first", "second"):
        raise InvalidDifferencing("cov_differenced needs 'first' or 'second'")
    _probe_profile(profile, spec.n)
    n, tau = spec.n, spec.tau
    raw_spec = ModelSpec(spec.model, n, spec.tau, q=spec.q, differencing="none")

    if spec.model == "m1" and spec.differencing == "first":
        d = np.array([
            profile.poly_integral((k - 1) / n, k / n, 0.0, (1.0,))
            for k in range(1, n + 1)
        ])
        return sym(np.diag(d) + tau * tau * matrix_a(n))

    if spec.model == "m2" and spec.differencing == "first":
        t = np.arange(1, n + 1) / n
        s = np.sqrt(np.asarray(profile.eval(t), dtype=float))
        idx = np.arange(n)
        signal = np.outer(s, s) * ((np.minimum.outer(idx, idx) + 1) / n)
        return sym(_conjugate_first(signal) + tau * tau * matrix_a(n))

    if spec.model == "m3" and spec.differencing == "second":
        sq = (0.0, 0.0, 1.0)
        left = np.array([
            profile.poly_integral((i - 1) / n, i / n, i / n, sq)
            for i in range(1, n + 1)
        ])
        right = np.zeros(n)
        for i in range(2, n + 1):
            right[i - 1] = profile.poly_integral(
                (i - 2) / n, (i - 1) / n, (i - 2) / n, sq
            )
        cross = np.array([
            profile.poly_integral((i - 1) / n, i / n, (i - 1) / n, (0.0, 1.0 / n, -1.0))
            for i in range(1, n + 1)
        ])
        c = np.zeros((n, n))
        c[0, 0] = 2.0 * left[0]
        for i in range(1, n):
            c[i, i] = left[i] + right[i]
        if n >= 2:
            c[0, 1] = c[1, 0] = math.sqrt(2.0) * cross[0]
        for i in range(1, n - 1):
            c[i, i + 1] = c[i + 1, i] = cross[i]
        return sym(c + tau * tau * second_diff_noise_gram(n))

    # generic fallback: conjugation of the raw covariance
    raw = cov_raw(raw_spec, profile)
    if spec.differencing == "first":
        return _conjugate_first(raw)
    return _conjugate_second(raw)


@dataclass(frozen=True)
class Model2Decomposition:
    """Pieces of the differenced m2 covariance beyond the constant-sigma part.

    With ``Pi = diag(sigma(i/n))``, ``gamma = Pi - I`` and ``Sigma_0`` the
    differenced covariance under ``sigma^2 = 1``, the reconstruction

        cov = Sigma_0 + (2/n) gamma + (1/n) gamma^2
              + cov_x1p_r1 + cov_x1p_r1.T + cov_r1

    holds to rounding.
    """

    cov_r1: np.ndarray
    cov_x1p_r1: np.ndarray
    gamma: np.ndarray


def model2_decomposition(profile: VolatilityProfile, n: int, tau: float) -> Model2Decomposition:
    """Exact covariance pieces created by a non-constant sigma in model m2."""
    if n < 2:
        raise ValueError("decomposition needs n >= 2")
    _probe_profile(profile, n)
    t = np.arange(1, n + 1) / n
    s = np.sqrt(np.asarray(profile.eval(t), dtype=float))
    ds = np.empty(n)
    ds[0] = s[0]  # sigma(0) taken as 0 by convention; first row is killed below
    ds[1:] = s[1:] - s[:-1]

    idx = np.arange(n)
    w = np.minimum.outer(idx, idx) / n  # (min(i, j) - 1)/n with 1-based i, j
    cov_r1 = sym(np.outer(ds, ds) * w)

    e = np.triu(np.ones((n, n)), k=1)
    cov_x1p_r1 = (np.outer(s, np.ones(n)) * e * ds[np.newaxis, :]) / n

    gamma = np.diag(s - 1.0)
    return Model2Decomposition(cov_r1=cov_r1, cov_x1p_r1=cov_x1p_r1, gamma=gamma)


def extract_v2(n: int, tau: float) -> np.ndarray:
    """Noise-Gram residual ``D2 @ D2.T - A^2``; nonzero only in the 3x3 corner."""
    if n < 4:
        raise ValueError("extract_v2 needs n >= 4")
    if tau <= 0.0:
        raise ValueError("extract_v2 needs tau > 0")
    a = matrix_a(n)
    return sym(second_diff_noise_gram(n) - a @ a)


def model3_reference_decomposition(n: int, tau: float) -> np.ndarray:
    """Structured form of the differenced m3 null covariance.

    ``(1/n^3) I - A/(6 n^3) + (sqrt(2)-1)/(6 n^3) V1 + tau^2 (A^2 + V2)``.
    Used as a cross-check only: its (1, 1) signal entry is ``5/(6 n^3)``
    whereas the exact covariance gives ``4/(6 n^3)``; compare entries with
    i, j >= 2 and surface the corner discrepancy explicitly.
    """
    a = matrix_a(n)
    n3 = float(n) ** 3
    return sym(
        np.eye(n) / n3
        - a / (6.0 * n3)
        + (math.sqrt(2.0) - 1.0) / (6.0 * n3) * matrix_v1(n)
        + tau * tau * second_diff_noise_gram(n)
    )


def matrix_to_csv(m: np.ndarray, path) -> None:
    """Write a matrix as row-major CSV (full storage, one row per line)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatch("matrix_to_csv expects a 2-d array")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in m:
            writer.writerow([repr(float(x)) for x in row])


def covariance_descriptor(spec: ModelSpec, profile: VolatilityProfile) -> dict:
    """JSON-serialisable header describing a covariance build."""
    return {
        "model": spec.model,
        "n": spec.n,
        "tau": spec.tau,
        "q": spec.q,
        "differencing": spec.differencing,
        "profile": profile.descriptor(),
    }


def write_covariance_bundle(spec: ModelSpec, profile: VolatilityProfile,
                            matrix: np.ndarray, json_path, csv_path) -> None:
    """Write the JSON header and the CSV payload for one covariance."""
    header = covariance_descriptor(spec, profile)
    header["payload_csv"] = str(Path(csv_path).name)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, sort_keys=True, indent=2)
        fh.write("\n")
    matrix_to_csv(matrix, csv_path)
