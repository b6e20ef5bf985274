"""Bump-kernel hypothesis families for minimax lower-bound experiments.

The alternatives are squared-volatility functions

    sigma_omega^2(t) = 1 + sum_k omega_k * phi_k(t),
    phi_k(t) = L * h^alpha * K((t - t_k) / h),

built from a smooth compactly supported bump ``K`` scaled so that it lies
in the Hoelder ball of radius 1/2, placed on ``m`` disjoint intervals of
width ``h = 1/(2m)`` inside [1/4, 3/4].  Binary words ``omega`` are drawn
from a code with pairwise Hamming distance at least m/8 and at least
2^(m/8) alternatives (the classical counting guarantee; this module
*constructs* such a code greedily and certifies the guarantee after the
fact).  Disjoint supports give the exact separation identity

    integral (sigma_omega^2 - sigma_omega'^2)^2
        = L^2 h^(2 alpha + 1) ||K||_2^2 * hamming(omega, omega').

Hoelder convention: membership in C(alpha, L) constrains the derivative of
order ``p = ceil(alpha) - 1`` with exponent ``alpha - p``, so C(1, L) is
the Lipschitz class.  Checks are grid based: necessary, not sufficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConstructionFailure,
    IndexOutOfRange,
    TooFewBumps,
    UnsupportedAlpha,
)
from .profiles import VolatilityProfile

__all__ = [
    "BumpKernel",
    "bump_kernel",
    "kernel_constant",
    "holder_exponent_order",
    "holder_check",
    "vg_code",
    "hamming",
    "HypothesisFamily",
    "build_family",
    "BumpSumProfile",
    "single_bump_profile",
    "l2_separation",
    "separation_closed_form",
]

ALPHA_MIN, ALPHA_MAX = 0.5, 2.0


def _bump_raw(u):
    """Unnormalised bump ``exp(-1 / (1 - (2u)^2))`` on |2u| < 1, else 0."""
    u = np.asarray(u, dtype=float)
    w = 1.0 - 4.0 * u * u
    inside = w > 1e-12
    out = np.zeros(u.shape)
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / w[inside])
    return out


def _bump_raw_d1(u):
    """First derivative of the unnormalised bump."""
    u = np.asarray(u, dtype=float)
    w = 1.0 - 4.0 * u * u
    inside = w > 1e-12
    out = np.zeros(u.shape)
    ui, wi = u[inside], w[inside]
    out[inside] = -8.0 * ui / wi**2 * np.exp(-1.0 / wi)
    return out


def _bump_raw_d2(u):
    """Second derivative of the unnormalised bump."""
    u = np.asarray(u, dtype=float)
    w = 1.0 - 4.0 * u * u
    inside = w > 1e-12
    out = np.zeros(u.shape)
    ui, wi = u[inside], w[inside]
    h = -8.0 * ui / wi**2
    hp = -8.0 / wi**2 - 128.0 * ui**2 / wi**3
    out[inside] = (hp + h * h) * np.exp(-1.0 / wi)
    return out


def holder_exponent_order(alpha: float) -> int:
    """Derivative order ``p`` constrained by C(alpha, L): ``ceil(alpha) - 1``."""
    if alpha <= 0.0:
        raise UnsupportedAlpha("alpha must be positive")
    return max(int(math.ceil(alpha)) - 1, 0)


def _pair_seminorm(values: np.ndarray, xs: np.ndarray, beta: float) -> float:
    """max over grid pairs of |f(x) - f(y)| / |x - y|^beta."""
    dv = np.abs(values[:, None] - values[None, :])
    dx = np.abs(xs[:, None] - xs[None, :])
    iu = np.triu_indices(xs.size, k=1)
    return float(np.max(dv[iu] / dx[iu] ** beta))


@lru_cache(maxsize=None)
def kernel_constant(alpha: float) -> float:
    """Normalisation ``a`` placing the bump in the Hoelder ball of radius 1/2.

    ``a = 0.99 * (1/2) / S`` with ``S`` the grid-estimated seminorm of the
    unnormalised bump at order ``p = ceil(alpha) - 1`` (derivatives are
    analytic).  The 0.99 margin keeps grid-certified membership robust to
    off-grid excursions.
    """
    if not ALPHA_MIN < alpha <= ALPHA_MAX:
        raise UnsupportedAlpha(
            f"alpha must lie in ({ALPHA_MIN}, {ALPHA_MAX}], got {alpha}"
        )
    p = holder_exponent_order(alpha)
    xs = np.linspace(-0.55, 0.55, 1601)
    values = _bump_raw(xs) if p == 0 else _bump_raw_d1(xs)
    s = _pair_seminorm(values, xs, alpha - p)
    return 0.99 * 0.5 / s


@dataclass(frozen=True)
class BumpKernel:
    """Normalised bump ``K(u) = a * exp(-1/(1-(2u)^2))`` supported on [-1/2, 1/2]."""

    alpha: float
    a: float

    def eval(self, u):
        return self.a * _bump_raw(u)

    def deriv1(self, u):
        return self.a * _bump_raw_d1(u)

    def deriv2(self, u):
        return self.a * _bump_raw_d2(u)

    @property
    def sup_value(self) -> float:
        """``max K = K(0) = a / e``."""
        return self.a / math.e

    @cached_property
    def l2_norm_sq(self) -> float:
        """``integral_{-1/2}^{1/2} K(u)^2 du`` by quadrature."""
        val, _ = quad(lambda u: float(self.eval(u)) ** 2, -0.5, 0.5,
                      epsabs=1e-14, epsrel=1e-12, limit=100)
        return val


def bump_kernel(alpha: float) -> BumpKernel:
    """Kernel with the normalisation computed for this smoothness index."""
    return BumpKernel(alpha=float(alpha), a=kernel_constant(float(alpha)))


def holder_check(f, alpha: float, l_const: float, grid_size: int = 800,
                 lower: float | None = None, upper: float | None = None,
                 deriv=None, domain=(0.0, 1.0)) -> bool:
    """Grid test of membership in C(alpha, l_const) on ``domain``.

    Evaluates the order-``p`` derivative (``deriv`` if supplied and
    otherwise central differences at step 1e-5; ``p = ceil(alpha) - 1``)
    on an equispaced grid and requires the pairwise seminorm to stay below
    ``l_const * (1 + 1e-6)``.  ``lower``/``upper``, when given, bound the
    function values themselves.  A grid check is necessary, not
    sufficient.
    """
    p = holder_exponent_order(alpha)
    xs = np.linspace(domain[0], domain[1], grid_size)

    def as_array(fn, pts):
        return np.asarray([float(fn(x)) for x in np.atleast_1d(pts)])

    fvals = as_array(f, xs)
    if lower is not None and np.min(fvals) < lower - 1e-12:
        return False
    if upper is not None and np.max(fvals) > upper + 1e-12:
        return False

    if p == 0:
        dvals = fvals
    elif deriv is not None:
        dvals = as_array(deriv, xs)
    elif p == 1:
        step = 1e-5
        dvals = (as_array(f, xs + step) - as_array(f, xs - step)) / (2.0 * step)
    else:
        raise UnsupportedAlpha(
            "orders p >= 2 need an analytic derivative via deriv="
        )
    return _pair_seminorm(dvals, xs, alpha - p) <= l_const * (1.0 + 1e-6)


def hamming(w1, w2) -> int:
    """Hamming distance between two binary vectors."""
    return int(np.sum(np.asarray(w1) != np.asarray(w2)))


def _certify_code(words: np.ndarray, m: int) -> None:
    total = words.shape[0]
    if total - 1 < 2.0 ** (m / 8.0) - 1e-12:
        raise ConstructionFailure(
            f"only {total - 1} alternatives, need at least 2^(m/8)"
        )
    x = words.astype(np.int16)
    dist = np.abs(x[:, None, :] - x[None, :, :]).sum(axis=2)
    iu = np.triu_indices(total, k=1)
    if np.min(dist[iu]) * 8 < m:
        raise ConstructionFailure("pairwise Hamming distance below m/8")


def vg_code(m: int, seed: int = 0, target: int | None = None) -> np.ndarray:
    """Binary code with first word all-zeros, distance >= m/8, count >= 2^(m/8).

    Greedy in integer order for m <= 24, seeded random greedy beyond; the
    search stops once ``target`` words are collected (default: the
    guarantee plus one, so the alternatives alone meet the 2^(m/8) count).
    The guarantee is certified a posteriori either way; a search that
    cannot certify within its attempt budget (then a 10x larger one)
    raises :class:`ConstructionFailure`.

    Returns an array of shape (count, m) with uint8 entries, all-zeros row
    first.  Deterministic given (m, seed, target).
    """
    if m < 8:
        raise TooFewBumps(f"the code guarantee needs m >= 8, got {m}")
    d = math.ceil(m / 8.0)
    min_total = int(math.ceil(2.0 ** (m / 8.0))) + 1
    total = max(target or 0, min_total)

    accepted = [0]
    if m <= 24:
        cand = 1
        limit = 1 << m
        while len(accepted) < total and cand < limit:
            if all((cand ^ w).bit_count() >= d for w in accepted):
                accepted.append(cand)
            cand += 1
    else:
        rng = np.random.default_rng(seed)
        nbytes = (m + 7) // 8
        mask = (1 << m) - 1
        budget = 500 * total
        for _ in range(2):
            while len(accepted) < total and budget > 0:
                cand = int.from_bytes(rng.bytes(nbytes), "little") & mask
                budget -= 1
                if cand and all((cand ^ w).bit_count() >= d for w in accepted):
                    accepted.append(cand)
            if len(accepted) >= total:
                break
            budget = 5000 * total
    if len(accepted) < total:
        raise ConstructionFailure(
            f"collected {len(accepted)} of {total} words within budget"
        )
    words = np.array(
        [[(w >> k) & 1 for k in range(m)] for w in accepted], dtype=np.uint8
    )
    _certify_code(words, m)
    return words


class BumpSumProfile(VolatilityProfile):
    """``sigma^2(t) = 1 + amplitude * sum_k weights_k K((t - centers_k)/h)``."""

    kind = "bump"

    def __init__(self, kernel: BumpKernel, centers, h: float, amplitude: float,
                 weights, meta: dict | None = None):
        self.kernel = kernel
        self.centers = np.asarray(centers, dtype=float)
        self.h = float(h)
        self.amplitude = float(amplitude)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != self.centers.shape:
            raise ValueError("weights and centers must align")
        self._meta = dict(meta or {})
        edges = np.concatenate([self.centers - h / 2.0, self.centers + h / 2.0])
        upper = 1.0 + self.amplitude * max(np.max(self.weights, initial=0.0), 0.0) \
            * kernel.sup_value
        super().__init__(1.0, max(upper, 1.0),
                         breakpoints=np.sort(np.unique(edges)))

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.ones(t.shape)
        for c, w in zip(self.centers, self.weights):
            if w != 0.0:
                out = out + self.amplitude * w * self.kernel.eval((t - c) / self.h)
        return float(out) if out.ndim == 0 else out

    def deriv(self, t):
        """Analytic first derivative of ``sigma^2``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for c, w in zip(self.centers, self.weights):
            if w != 0.0:
                out = out + self.amplitude * w / self.h \
                    * self.kernel.deriv1((t - c) / self.h)
        return float(out) if out.ndim == 0 else out

    def poly_integral(self, a, b, shift, coeffs):
        if b <= a:
            return 0.0
        base = _shifted_poly_piece(coeffs, shift, a, b)
        total = base
        for c, w in zip(self.centers, self.weights):
            if w == 0.0:
                continue
            lo, hi = max(a, c - self.h / 2.0), min(b, c + self.h / 2.0)
            if hi <= lo:
                continue

            def integrand(u, c=c, w=w):
                v = u - shift
                poly = 0.0
                for r, cf in enumerate(coeffs):
                    poly += cf * v**r
                return poly * self.amplitude * w * float(self.kernel.eval((u - c) / self.h))

            val, _ = quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200)
            total += val
        return total

    def descriptor(self):
        d = {
            "kind": self.kind,
            "h": self.h,
            "amplitude": self.amplitude,
            "centers": self.centers.tolist(),
            "weights": self.weights.tolist(),
            "kernel_a": self.kernel.a,
            "alpha": self.kernel.alpha,
        }
        d.update(self._meta)
        return d


def _shifted_poly_piece(coeffs, shift, a, b):
    hi = 0.0
    lo = 0.0
    for r, c in enumerate(coeffs):
        if c != 0.0:
            hi += c * (b - shift) ** (r + 1) / (r + 1)
            lo += c * (a - shift) ** (r + 1) / (r + 1)
    return hi - lo


def single_bump_profile(alpha: float, l_const: float, width: float,
                        center: float = 0.5) -> BumpSumProfile:
    """One bump of the canonical shape: ``1 + L width^alpha K((t-center)/width)``."""
    kernel = bump_kernel(alpha)
    return BumpSumProfile(
        kernel=kernel,
        centers=[center],
        h=width,
        amplitude=l_const * width**alpha,
        weights=[1.0],
    )


@dataclass(frozen=True)
class HypothesisFamily:
    """A grid of disjoint bumps plus the codewords selecting alternatives.

    ``codewords[0]`` is all-zeros (the null); rows 1.. are the
    alternatives.  ``model_class`` picks the bump-count formula:
    ``m = floor(c n^(1/(4 alpha + 2)) / 2 + 1)`` for "m1m2" and exponent
    ``1/(8 alpha + 4)`` for "m3".
    """

    n: int
    alpha: float
    l_const: float
    c: float
    model_class: str
    seed: int
    m: int
    h: float
    centers: np.ndarray
    codewords: np.ndarray
    kernel: BumpKernel

    @property
    def count_alternatives(self) -> int:
        return self.codewords.shape[0] - 1

    @property
    def amplitude(self) -> float:
        return self.l_const * self.h**self.alpha

    @property
    def upper_bound(self) -> float:
        return 1.0 + self.amplitude * self.kernel.sup_value

    def profile(self, index: int) -> BumpSumProfile:
        """Profile ``sigma^2_omega`` for codeword ``index`` (0 = null)."""
        if not 0 <= index < self.codewords.shape[0]:
            raise IndexOutOfRange(
                f"codeword index {index} outside 0..{self.codewords.shape[0] - 1}"
            )
        return BumpSumProfile(
            kernel=self.kernel,
            centers=self.centers,
            h=self.h,
            amplitude=self.amplitude,
            weights=self.codewords[index].astype(float),
            meta={"codeword_index": index},
        )

    def sigma_sq(self, index: int, t):
        return self.profile(index).eval(t)

    def descriptor(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "L": self.l_const,
            "c": self.c,
            "model_class": self.model_class,
            "seed": self.seed,
            "m": self.m,
            "h_n": self.h,
            "centers": self.centers.tolist(),
            "codewords": ["".join(str(int(b)) for b in w) for w in self.codewords],
            "a": self.kernel.a,
            "K_l2_sq": self.kernel.l2_norm_sq,
        }


def build_family(n: int, alpha: float, l_const: float, c: float,
                 model_class: str, seed: int = 0,
                 max_codewords: int | None = None) -> HypothesisFamily:
    """Construct the bump grid and codewords for sample size ``n``.

    Raises :class:`TooFewBumps` when the bump-count formula lands below 8
    (the code guarantee starts there) and :class:`UnsupportedAlpha`
    outside (1/2, 2].
    """
    if model_class not in ("m1m2", "m3"):
        raise ValueError("model_class must be 'm1m2' or 'm3'")
    if n < 2 or c <= 0.0 or l_const <= 0.0:
        raise ValueError("need n >= 2, c > 0, L > 0")
    kernel = bump_kernel(alpha)
    exponent = 1.0 / (4.0 * alpha + 2.0) if model_class == "m1m2" \
        else 1.0 / (8.0 * alpha + 4.0)
    # absolute nudge absorbs float pow error in n**exponent before flooring
    m = int(math.floor(0.5 * c * n**exponent + 1.0 + 1e-9))
    if m < 8:
        raise TooFewBumps(
            f"bump count m = {m} < 8 for n = {n}; increase c or n"
        )
    h = 1.0 / (2.0 * m)
    k = np.arange(1, m + 1, dtype=float)
    centers = h * (k - 0.5) + 0.25
    codewords = vg_code(m, seed=seed, target=max_codewords)
    return HypothesisFamily(
        n=n, alpha=float(alpha), l_const=float(l_const), c=float(c),
        model_class=model_class, seed=int(seed), m=m, h=h,
        centers=centers, codewords=codewords, kernel=kernel,
    )


def l2_separation(family: HypothesisFamily, i: int, j: int) -> float:
    """``integral_0^1 (sigma_i^2 - sigma_j^2)^2 dt`` by quadrature.

    Disjoint supports reduce the integral to the bumps where the codewords
    differ; each is integrated adaptively.  Equals
    :func:`separation_closed_form` times the Hamming distance.
    """
    total = family.codewords.shape[0]
    for idx in (i, j):
        if not 0 <= idx < total:
            raise IndexOutOfRange(f"codeword index {idx} outside 0..{total - 1}")
    wi, wj = family.codewords[i], family.codewords[j]
    amp = family.amplitude
    acc = 0.0
    for k in np.nonzero(wi != wj)[0]:
        c = family.centers[k]

        def integrand(u, c=c):
            return (amp * float(family.kernel.eval((u - c) / family.h))) ** 2

        val, _ = quad(integrand, c - family.h / 2.0, c + family.h / 2.0,
                      epsabs=1e-15, epsrel=1e-12, limit=200)
        acc += val
    return acc


def separation_closed_form(family: HypothesisFamily) -> float:
    """Per-unit-distance separation ``L^2 h^(2 alpha + 1) ||K||_2^2``."""
    return (
        family.l_const**2
        * family.h ** (2.0 * family.alpha + 1.0)
        * family.kernel.l2_norm_sq
    )
