"""Numerical certificates for the multiple-testing lower-bound conditions.

A lower bound by the multiple-testing method needs, at a given sample size
``n``, a family of volatility alternatives satisfying three conditions:

  (i)   every alternative lies in the smoothness class C(alpha, L) and
        between the class bounds;
  (ii)  alternatives are pairwise separated in L2 at the target rate
        (threshold ``c * n^-rate`` with the per-model rate exponent);
  (iii) the average exact KL divergence of the alternatives from the null
        stays below ``kappa * log2(M)`` bits (compared in nats), with
        ``kappa < 1/10``.

The certificate evaluates all three at finite ``n`` with exact
computations and records every intermediate quantity; it asserts nothing
asymptotic.  Alongside the exact divergences it evaluates the Frobenius
bound with constant ``C = 1`` (models m1/m3, where the alternative
covariance dominates the null) or ``C = (2 + 12 L^2)^-1`` (model m2), and
records whether that bound alone would also certify (iii).

KL values are in nats; ``log M`` is binary and converted by ln 2 when the
two meet, and both raw numbers are stored.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded
from .hypotheses import (
    build_family,
    hamming,
    holder_check,
    l2_separation,
    single_bump_profile,
)
from .kl import kl_bound, kl_exact
from .linalg import is_psd, loewner_leq
from .models import ModelSpec, cov_differenced
from .profiles import ConstantProfile
from .regression import ols_slope

__all__ = [
    "SeparationCondition",
    "DivergenceCondition",
    "Certificate",
    "evaluate",
    "two_point_certificate_m3",
    "rate_exponent",
    "RateRow",
    "rate_table",
    "KLScalingResult",
    "kl_scaling_probe",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SeparationCondition:
    """Minimum pairwise L2 separation versus the rate threshold."""

    min_separation: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "min_separation": self.min_separation,
            "threshold": self.threshold,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class DivergenceCondition:
    """Average exact KL against ``kappa * log2(M)`` (converted to nats)."""

    avg_kl: float
    log2_m: float
    kappa_bound: float
    passed: bool
    mode: str  # "exhaustive" | "sampled" | "explicit"
    bound_c: float
    bound_avg: float
    bound_preconditions_ok: bool
    bound_certifies: bool

    def to_dict(self) -> dict:
        return {
            "avg_kl": self.avg_kl,
            "log2_M": self.log2_m,
            "kappa_bound": self.kappa_bound,
            "pass": self.passed,
            "mode": self.mode,
            "frobenius_bound_c": self.bound_c,
            "frobenius_bound_avg": self.bound_avg,
            "frobenius_bound_preconditions_ok": self.bound_preconditions_ok,
            "frobenius_bound_certifies": self.bound_certifies,
        }


@dataclass(frozen=True)
class Certificate:
    """Machine-checkable record of conditions (i)-(iii) at one configuration."""

    model: str
    n: int
    alpha: float
    l_const: float
    tau: float
    c: float
    kappa: float
    family: dict
    cond_i: bool
    cond_ii: SeparationCondition
    cond_iii: DivergenceCondition
    hypotheses_evaluated: int
    overall_pass: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "n": self.n,
            "alpha": self.alpha,
            "L": self.l_const,
            "tau": self.tau,
            "c": self.c,
            "kappa": self.kappa,
            "family": self.family,
            "cond_i": self.cond_i,
            "cond_ii": self.cond_ii.to_dict(),
            "cond_iii": self.cond_iii.to_dict(),
            "hypotheses_evaluated": self.hypotheses_evaluated,
            "overall_pass": self.overall_pass,
            "details": self.details,
        }


def rate_exponent(model: str, alpha: float, q: float | None = None) -> float:
    """Lower-bound rate exponent (power of n) for one model."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    if model in ("m1", "m2"):
        return -alpha / (4.0 * alpha + 2.0)
    if model == "m3":
        return -alpha / (8.0 * alpha + 4.0)
    if model == "mq":
        if q is None or q < 0.0:
            raise ValueError("model mq needs q >= 0")
        return -alpha / ((2.0 * q + 2.0) * (2.0 * alpha + 1.0))
    raise ValueError(f"unknown model {model!r}")


def _bound_constant(model: str, l_const: float) -> float:
    """Loewner constant used with the Frobenius bound per model."""
    if model == "m2":
        return 1.0 / (2.0 + 12.0 * l_const**2)
    return 1.0


def _differencing(model: str) -> str:
    return "second" if model == "m3" else "first"


def evaluate(model: str, n: int, alpha: float, l_const: float, tau: float,
             c: float, kappa: float, max_hypotheses: int = 16, seed: int = 0,
             workers: int = 1,
             hypothesis_indices: list[int] | None = None) -> Certificate:
    """Build the family at (n, alpha, L, c) and certify conditions (i)-(iii).

    When the family has more alternatives than ``max_hypotheses``, a
    seeded uniform sample estimates the average divergence and the
    certificate is labelled "sampled".  ``hypothesis_indices`` overrides
    the selection entirely (inspection hook; labelled "explicit").
    Deterministic for fixed inputs and seed.
    """
    if model not in ("m1", "m2", "m3"):
        raise ValueError("certificates cover models m1, m2, m3")
    if n > 4096:
        raise ValueError("n > 4096 exceeds the exact-KL desk bound")
    if not 0.0 < kappa < 0.1:
        raise ValueError("kappa must lie in (0, 1/10)")
    if max_hypotheses < 1:
        raise BudgetExceeded("max_hypotheses must be >= 1")
    if tau <= 0.0:
        raise ValueError("certificates need tau > 0")

    model_class = "m3" if model == "m3" else "m1m2"
    family = build_family(n, alpha, l_const, c, model_class, seed=seed)
    m_alt = family.count_alternatives

    if hypothesis_indices is not None:
        indices = list(hypothesis_indices)
        mode = "explicit"
    elif m_alt <= max_hypotheses:
        indices = list(range(1, m_alt + 1))
        mode = "exhaustive"
    else:
        rng = np.random.default_rng([seed, 0x5EB])
        indices = sorted(
            int(i) for i in
            rng.choice(np.arange(1, m_alt + 1), size=max_hypotheses, replace=False)
        )
        mode = "sampled"

    diff = _differencing(model)
    spec = ModelSpec(model, n, tau, differencing=diff)
    null_cov = cov_differenced(spec, ConstantProfile(1.0))
    bound_c = _bound_constant(model, l_const)
    grid_size = max(800, 40 * family.m)

    def one_hypothesis(k: int) -> dict:
        prof = family.profile(k)
        cov_k = cov_differenced(spec, prof)
        in_class = holder_check(
            prof.eval, alpha, l_const, grid_size=grid_size,
            lower=1.0, upper=family.upper_bound, deriv=prof.deriv,
        )
        pre_ok = loewner_leq(bound_c * null_cov, cov_k)
        entry = {
            "index": k,
            "kl": kl_exact(null_cov, cov_k),
            "frobenius_bound": kl_bound(null_cov, cov_k, bound_c).value,
            "precondition_ok": bool(pre_ok),
            "in_class": bool(in_class),
        }
        if model == "m3":
            entry["ordering_psd"] = bool(is_psd(cov_k - null_cov))
        return entry

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one_hypothesis, indices))
    else:
        rows = [one_hypothesis(k) for k in indices]

    cond_i = all(r["in_class"] for r in rows)
    avg_kl = float(np.mean([r["kl"] for r in rows])) if rows else 0.0
    bound_avg = float(np.mean([r["frobenius_bound"] for r in rows])) if rows else 0.0
    pre_all = all(r["precondition_ok"] for r in rows)
    log2_m = math.log2(m_alt) if m_alt >= 1 else float("-inf")
    kappa_bound = kappa * log2_m * LN2

    total = family.codewords.shape[0]
    min_sep_sq = math.inf
    min_rho = None
    for i in range(total):
        for j in range(i + 1, total):
            sep = l2_separation(family, i, j)
            if sep < min_sep_sq:
                min_sep_sq = sep
                min_rho = hamming(family.codewords[i], family.codewords[j])
    min_separation = math.sqrt(min_sep_sq)
    threshold = c * float(n) ** rate_exponent(model, alpha)

    cond_ii = SeparationCondition(
        min_separation=min_separation,
        threshold=threshold,
        passed=min_separation >= threshold,
    )
    cond_iii = DivergenceCondition(
        avg_kl=avg_kl,
        log2_m=log2_m,
        kappa_bound=kappa_bound,
        passed=avg_kl <= kappa_bound,
        mode=mode,
        bound_c=bound_c,
        bound_avg=bound_avg,
        bound_preconditions_ok=pre_all,
        bound_certifies=pre_all and bound_avg <= kappa_bound,
    )
    details = {
        "per_hypothesis": rows,
        "min_separation_hamming": min_rho,
        "workers": workers,
    }
    if model == "m3":
        details["ordering_psd_all"] = all(r["ordering_psd"] for r in rows)

    return Certificate(
        model=model, n=n, alpha=float(alpha), l_const=float(l_const),
        tau=float(tau), c=float(c), kappa=float(kappa),
        family=family.descriptor(),
        cond_i=cond_i, cond_ii=cond_ii, cond_iii=cond_iii,
        hypotheses_evaluated=len(rows),
        overall_pass=cond_i and cond_ii.passed and cond_iii.passed,
        details=details,
    )


def two_point_certificate_m3(n: int, sigma_min: float, sigma_max: float,
                             c: float, tau: float,
                             kappa: float = 0.09) -> Certificate:
    """Two-hypothesis certificate for constant volatility in model m3.

    Null ``sigma_0^2 = sigma_min`` against ``sigma_1^2 = sigma_min +
    c n^(-1/8)``; the exact divergence of the second-differenced laws is
    compared with ``kappa * log2(2)`` in nats, and the squared separation
    ``c^2 n^(-1/4)`` is recorded.
    """
    if not 0.0 < sigma_min < sigma_max:
        raise ValueError("need 0 < sigma_min < sigma_max")
    if c < 0.0:
        raise ValueError("c must be >= 0")
    if not 0.0 < kappa < 0.1:
        raise ValueError("kappa must lie in (0, 1/10)")
    if tau <= 0.0:
        raise ValueError("needs tau > 0")
    sigma1 = sigma_min + c * float(n) ** (-1.0 / 8.0)
    if sigma1 > sigma_max + 1e-12:
        raise ValueError("sigma_1^2 exceeds sigma_max; lower c")

    spec = ModelSpec("m3", n, tau, differencing="second")
    cov0 = cov_differenced(spec, ConstantProfile(sigma_min))
    cov1 = cov_differenced(spec, ConstantProfile(sigma1))
    kl = kl_exact(cov0, cov1)
    separation = sigma1 - sigma_min
    kappa_bound = kappa * 1.0 * LN2  # log2(M) = 1 for M = 2 hypotheses
    pre_ok = bool(loewner_leq(cov0, cov1))
    bound_val = kl_bound(cov0, cov1, 1.0).value

    cond_ii = SeparationCondition(
        min_separation=separation,
        threshold=c * float(n) ** (-1.0 / 8.0),
        passed=True,
    )
    cond_iii = DivergenceCondition(
        avg_kl=kl, log2_m=1.0, kappa_bound=kappa_bound,
        passed=kl <= kappa_bound, mode="exhaustive",
        bound_c=1.0, bound_avg=bound_val,
        bound_preconditions_ok=pre_ok,
        bound_certifies=pre_ok and bound_val <= kappa_bound,
    )
    return Certificate(
        model="m3", n=n, alpha=float("nan"), l_const=float("nan"),
        tau=float(tau), c=float(c), kappa=float(kappa),
        family={
            "kind": "two_point",
            "sigma0_sq": sigma_min,
            "sigma1_sq": sigma1,
            "separation_sq": (sigma1 - sigma_min) ** 2,
        },
        cond_i=True,
        cond_ii=cond_ii,
        cond_iii=cond_iii,
        hypotheses_evaluated=1,
        overall_pass=cond_iii.passed,
        details={"ordering_psd_all": pre_ok},
    )


@dataclass(frozen=True)
class RateRow:
    """One line of the rate table: model (or kernel power), alpha, exponent."""

    model: str
    q: float | None
    alpha: float
    exponent: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "q": self.q,
            "alpha": self.alpha,
            "exponent": self.exponent,
        }


def rate_table(alpha_list, q_list=()) -> list[RateRow]:
    """Rate exponents for the three models and any fractional kernel powers."""
    rows = []
    for alpha in alpha_list:
        for model in ("m1", "m2", "m3"):
            rows.append(RateRow(model, None, float(alpha),
                                rate_exponent(model, alpha)))
        for q in q_list:
            rows.append(RateRow("mq", float(q), float(alpha),
                                rate_exponent("mq", alpha, q)))
    return rows


@dataclass(frozen=True)
class KLScalingResult:
    """Exact KL of a fixed single-bump alternative across sample sizes."""

    model: str
    alpha: float
    l_const: float
    tau: float
    bump_width: float
    n_list: tuple
    kl_values: tuple
    reference: tuple
    slope: float
    slope_se: float
    predicted_slope: float

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "alpha": self.alpha,
            "L": self.l_const,
            "tau": self.tau,
            "bump_width": self.bump_width,
            "rows": [
                {"n": n, "kl": kl, "reference": ref}
                for n, kl, ref in zip(self.n_list, self.kl_values, self.reference)
            ],
            "slope": self.slope,
            "slope_se": self.slope_se,
            "predicted_slope": self.predicted_slope,
        }


def kl_scaling_probe(model: str, alpha: float, l_const: float, tau: float,
                     n_list, bump_width: float = 0.125,
                     center: float = 0.5) -> KLScalingResult:
    """Exact KL growth in ``n`` for one fixed bump alternative.

    The bump width is held constant across ``n``, so the divergence should
    grow like ``n^(1/2)`` for models m1/m2 and ``n^(1/4)`` for m3 (times
    the fixed ``h^(2 alpha)`` factor); the log-log slope is returned with
    its standard error.
    """
    if model not in ("m1", "m2", "m3"):
        raise ValueError("probe covers models m1, m2, m3")
    if tau <= 0.0:
        raise ValueError("needs tau > 0")
    n_list = [int(n) for n in n_list]
    if any(n > 4096 for n in n_list):
        raise ValueError("n > 4096 exceeds the exact-KL desk bound")
    alt = single_bump_profile(alpha, l_const, bump_width, center)
    null = ConstantProfile(1.0)
    predicted = 0.25 if model == "m3" else 0.5
    kls, refs = [], []
    for n in n_list:
        spec = ModelSpec(model, n, tau, differencing=_differencing(model))
        kls.append(kl_exact(cov_differenced(spec, null),
                            cov_differenced(spec, alt)))
        refs.append(float(n) ** predicted * bump_width ** (2.0 * alpha))
    if len(n_list) >= 2:
        slope, slope_se = ols_slope(np.log(n_list), np.log(kls))
    else:
        slope, slope_se = float("nan"), float("nan")
    return KLScalingResult(
        model=model, alpha=float(alpha), l_const=float(l_const),
        tau=float(tau), bump_width=float(bump_width),
        n_list=tuple(n_list), kl_values=tuple(kls), reference=tuple(refs),
        slope=slope, slope_se=slope_se, predicted_slope=predicted,
    )
