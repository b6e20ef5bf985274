"""Exact Gaussian sampling and rate experiments at desk scale.

Sampling goes through the Cholesky factor of an exact model covariance, or
through the O(n) model recursion for model m1 with constant volatility
(identical law, no dense matrix).  Replicate ``r`` of a run seeded with
``s`` always draws from the stream keyed ``(s, ..., r)``, so serial and
parallel executions produce bit-identical output.

The constant-volatility maximum-likelihood estimator for model m1 works in
the sine eigenbasis of the first-difference Gram matrix, where the
differenced observations decouple into independent coordinates with
variances ``sigma^2 / n + tau^2 lambda_i``; the one-dimensional likelihood
is then maximised by safeguarded Newton/bisection.  ``tau`` is assumed
known throughout.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .errors import BlockTooSmall, OptimizationFailure
from .linalg import cholesky_lower
from .regression import ols_slope
from .structures import eigvals_closed, sine_transform

__all__ = [
    "replicate_rng",
    "sample_gaussian",
    "sample_m1_constant_diff",
    "mle_const_sigma_m1",
    "realized_variance",
    "BinnedEstimate",
    "binned_estimator",
    "ExperimentResult",
    "rate_experiment",
]

ESTIMATORS = ("mle", "rv", "rv_uncorrected")


def replicate_rng(seed: int, *stream) -> np.random.Generator:
    """Generator for one replicate, keyed by (seed, *stream) counters.

    Counter-derived streams make parallel and serial runs identical: the
    draw for replicate r never depends on how many replicates ran before
    it.
    """
    return np.random.default_rng([int(seed)] + [int(s) for s in stream])


def sample_gaussian(cov, reps: int, seed: int = 0) -> np.ndarray:
    """``reps`` independent N(0, cov) draws as rows, via the Cholesky factor.

    Deterministic per (seed, replicate index); raises
    :class:`mnlab.errors.NotPositiveDefinite` for a non-PD covariance.
    """
    low = cholesky_lower(cov)
    n = low.shape[0]
    if reps < 1:
        raise ValueError("reps must be >= 1")
    out = np.empty((reps, n))
    for r in range(reps):
        out[r] = low @ replicate_rng(seed, r).standard_normal(n)
    return out


def sample_m1_constant_diff(sigma_sq: float, tau: float, n: int,
                            rep: int = 0, seed: int = 0) -> np.ndarray:
    """One first-differenced m1 sample with constant ``sigma^2``, in O(n).

    Draws the Brownian increments and the noise directly:
    ``dY_i = sigma xi_i / sqrt(n) + tau (eps_i - eps_{i-1})`` with
    ``eps_0 = 0``, whose covariance is exactly
    ``(sigma^2/n) I + tau^2 A``.
    """
    rng = replicate_rng(seed, n, rep)
    xi = rng.standard_normal(n)
    eps = rng.standard_normal(n)
    out = math.sqrt(sigma_sq / n) * xi
    out += tau * eps
    out[1:] -= tau * eps[:-1]
    return out


def m1_interval_sds(profile, n: int) -> np.ndarray:
    """Standard deviations of the m1 signal increments for any profile."""
    return np.sqrt([
        profile.poly_integral((k - 1) / n, k / n, 0.0, (1.0,))
        for k in range(1, n + 1)
    ])


def sample_m1_profile_diff(interval_sds, tau: float, n: int,
                           rep: int = 0, seed: int = 0) -> np.ndarray:
    """First-differenced m1 sample for a non-constant profile, in O(n).

    ``interval_sds`` comes from :func:`m1_interval_sds` (precompute it once
    per profile; it is the only profile-dependent piece).
    """
    rng = replicate_rng(seed, n, rep)
    out = np.asarray(interval_sds, dtype=float) * rng.standard_normal(n)
    eps = rng.standard_normal(n)
    out += tau * eps
    out[1:] -= tau * eps[:-1]
    return out


def _coordinate_variances(sigma_sq: float, n: int, tau: float,
                          lam: np.ndarray) -> np.ndarray:
    return sigma_sq / n + tau * tau * lam


def mle_const_sigma_m1(diff_data, n: int, tau: float,
                       bracket=(1e-8, 1e4), tol: float = 1e-10) -> float:
    """Exact constant-``sigma^2`` MLE from first-differenced m1 data.

    ``diff_data`` may be the full differenced sample (length n) or a
    contiguous block of it; ``n`` is always the global sampling rate, so
    block coordinates keep variances ``sigma^2/n + tau^2 lambda_i`` in the
    block-local sine basis.  The stationarity equation is solved by
    Newton iteration safeguarded by bisection on ``bracket``.  A score
    negative over the whole bracket means the likelihood peaks at the
    floor (noise-dominated sample); the floor is returned.  A score still
    positive at the ceiling means the data are inconsistent with the
    bracket and :class:`OptimizationFailure` is raised carrying a
    (sigma^2, loglik) profile.
    """
    data = np.asarray(diff_data, dtype=float)
    if data.ndim != 1 or data.size < 1:
        raise ValueError("diff_data must be a non-empty vector")
    if tau <= 0.0:
        raise ValueError("tau must be positive (assumed known)")
    lam = eigvals_closed(data.size)
    c2 = sine_transform(data) ** 2
    tau2 = tau * tau

    def score(s: float) -> float:
        v = s / n + tau2 * lam
        return float(np.sum((c2 - v) / (v * v)))

    def score_deriv(s: float) -> float:
        v = s / n + tau2 * lam
        return float(np.sum((v - 2.0 * c2) / (v**3)) / n)

    def loglik(s: float) -> float:
        v = s / n + tau2 * lam
        return -0.5 * float(np.sum(np.log(v) + c2 / v))

    lo, hi = bracket
    g_lo, g_hi = score(lo), score(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo < 0.0 and g_hi < 0.0:
        return lo
    if not (g_lo > 0.0 > g_hi):
        grid = np.geomspace(lo, hi, 41)
        raise OptimizationFailure(
            "score is still positive at the bracket ceiling",
            profile=[(float(s), loglik(float(s))) for s in grid],
        )
    a, b = lo, hi
    s = math.sqrt(lo * hi)
    for _ in range(200):
        g = score(s)
        if g > 0.0:
            a = s
        elif g < 0.0:
            b = s
        else:
            return s
        if b - a <= tol * max(1.0, b):
            break
        gp = score_deriv(s)
        cand = s - g / gp if gp != 0.0 else 0.5 * (a + b)
        s = cand if a < cand < b else 0.5 * (a + b)
    return 0.5 * (a + b)


def realized_variance(diff_data, n: int, tau: float,
                      corrected: bool = True) -> float:
    """Sum of squared differences, optionally noise-corrected.

    The uncorrected sum estimates ``sigma^2 + (2n - 1) tau^2`` and is
    inconsistent under noise; subtracting the exact noise trace
    ``(2n - 1) tau^2`` removes the bias (the variance still grows with n).
    Baseline only.
    """
    rv = float(np.sum(np.asarray(diff_data, dtype=float) ** 2))
    if corrected:
        rv -= (2.0 * n - 1.0) * tau * tau
    return rv


@dataclass(frozen=True)
class BinnedEstimate:
    """Piecewise-constant volatility estimate over equal-width time blocks."""

    values: np.ndarray
    n: int
    tau: float

    @property
    def bins(self) -> int:
        return self.values.size

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip((t * self.bins).astype(int), 0, self.bins - 1)
        out = self.values[idx]
        return float(out) if out.ndim == 0 else out

    def integrated_squared_error(self, profile) -> float:
        """``integral_0^1 (estimate(t) - sigma^2(t))^2 dt`` by quadrature."""
        from scipy.integrate import quad

        total = 0.0
        for b, v in enumerate(self.values):
            lo, hi = b / self.bins, (b + 1) / self.bins
            pts = [p for p in profile.breakpoints if lo < p < hi]
            val, _ = quad(
                lambda u, v=v: (v - float(profile.eval(u))) ** 2,
                lo, hi, points=pts or None, epsabs=1e-12, epsrel=1e-9,
                limit=200,
            )
            total += val
        return total


def binned_estimator(diff_data, n: int, tau: float, bins: int) -> BinnedEstimate:
    """Blockwise constant-``sigma^2`` MLE; ``bins = 1`` is the global MLE.

    Block boundaries reuse the corner convention of the global basis, a
    one-entry approximation per interior block; fine for a baseline.
    """
    data = np.asarray(diff_data, dtype=float)
    if bins < 1 or data.size % bins != 0:
        raise ValueError("bins must divide the sample into equal blocks")
    block = data.size // bins
    if block < 16:
        raise BlockTooSmall(f"blocks of {block} < 16 observations")
    values = np.array([
        mle_const_sigma_m1(data[b * block : (b + 1) * block], n, tau)
        for b in range(bins)
    ])
    return BinnedEstimate(values=values, n=n, tau=tau)


@dataclass(frozen=True)
class ExperimentResult:
    """Monte Carlo error summary of one estimator across sample sizes."""

    model: str
    estimator: str
    n_list: tuple
    mse: tuple
    mse_se: tuple
    var: tuple
    var_se: tuple
    reps: int
    seed: int
    slope: float
    slope_se: float
    version: str = __version__
    config_hash: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "estimator": self.estimator,
            "rows": [
                {"n": n, "mse": m, "mse_se": ms, "var": v, "var_se": vs}
                for n, m, ms, v, vs in zip(
                    self.n_list, self.mse, self.mse_se, self.var, self.var_se
                )
            ],
            "reps": self.reps,
            "seed": self.seed,
            "slope": self.slope,
            "slope_se": self.slope_se,
            "version": self.version,
            "config_hash": self.config_hash,
            "extra": self.extra,
        }

    def to_csv_rows(self) -> list[list]:
        header = ["model", "estimator", "n", "mse", "mse_se", "var", "var_se",
                  "reps", "seed"]
        rows = [header]
        for n, m, ms, v, vs in zip(self.n_list, self.mse, self.mse_se,
                                   self.var, self.var_se):
            rows.append([self.model, self.estimator, n, repr(m), repr(ms),
                         repr(v), repr(vs), self.reps, self.seed])
        return rows


def _estimate_one(estimator: str, data: np.ndarray, n: int, tau: float) -> float:
    if estimator == "mle":
        return mle_const_sigma_m1(data, n, tau)
    if estimator == "rv":
        return realized_variance(data, n, tau, corrected=True)
    if estimator == "rv_uncorrected":
        return realized_variance(data, n, tau, corrected=False)
    raise ValueError(f"estimator must be one of {ESTIMATORS}")


def rate_experiment(model: str, estimator: str, n_list, reps: int,
                    seed: int = 0, sigma_sq: float = 1.0, tau: float = 0.1,
                    workers: int = 1) -> ExperimentResult:
    """Monte Carlo MSE of an estimator across ``n``, with a log-log fit.

    Only model m1 with constant volatility is wired up (the estimators
    here target it); the per-n squared errors are averaged over ``reps``
    replicates and ``log2(MSE)`` is regressed on ``log2(n)``.
    """
    if model != "m1":
        raise ValueError("rate_experiment supports model 'm1' only")
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    n_list = [int(n) for n in n_list]
    if sorted(n_list) != n_list or len(set(n_list)) != len(n_list):
        raise ValueError("n_list must be strictly ascending")
    if reps < 100:
        raise ValueError("reps must be >= 100 for a stable summary")

    def estimates_for(n: int) -> np.ndarray:
        def one(r: int) -> float:
            data = sample_m1_constant_diff(sigma_sq, tau, n, rep=r, seed=seed)
            return _estimate_one(estimator, data, n, tau)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return np.fromiter(pool.map(one, range(reps)), dtype=float,
                                   count=reps)
        return np.fromiter((one(r) for r in range(reps)), dtype=float,
                           count=reps)

    mse, mse_se, var, var_se = [], [], [], []
    for n in n_list:
        est = estimates_for(n)
        sq_err = (est - sigma_sq) ** 2
        mse.append(float(np.mean(sq_err)))
        mse_se.append(float(np.std(sq_err, ddof=1) / math.sqrt(reps)))
        v = float(np.var(est, ddof=1))
        var.append(v)
        var_se.append(v * math.sqrt(2.0 / (reps - 1)))

    if len(n_list) >= 2:
        slope, slope_se = ols_slope(np.log2(n_list), np.log2(mse))
    else:
        slope, slope_se = float("nan"), float("nan")
    config = {
        "model": model, "estimator": estimator, "n_list": n_list,
        "reps": reps, "seed": seed, "sigma_sq": sigma_sq, "tau": tau,
    }
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()
    ).hexdigest()
    return ExperimentResult(
        model=model, estimator=estimator, n_list=tuple(n_list),
        mse=tuple(mse), mse_se=tuple(mse_se), var=tuple(var),
        var_se=tuple(var_se), reps=reps, seed=seed,
        slope=slope, slope_se=slope_se, config_hash=digest,
    )
