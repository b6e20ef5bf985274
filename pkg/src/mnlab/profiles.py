"""Squared-volatility profiles on [0, 1] and their exact integrals.

A profile represents the function ``sigma^2(t) > 0`` driving a model.  The
covariance builders never sample profiles on a grid and sum; they ask the
profile for weighted integrals

    integral_a^b  p(u) * sigma^2(u) du,    p a polynomial,

which constant and piecewise-constant profiles answer in closed form and
everything else answers by adaptive quadrature (QUADPACK) at absolute
tolerance 1e-12, with subdivision forced at the profile's breakpoints.
Polynomials are passed in shifted coordinates (coefficients of powers of
``u - shift``) so that short-interval integrals near ``u = shift`` come
out at full relative precision instead of through catastrophic
cancellation.

Profiles are immutable and evaluable concurrently; the only caching is a
synchronized memo with no semantic effect.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import QuadratureFailure

__all__ = [
    "VolatilityProfile",
    "ConstantProfile",
    "PiecewiseConstantProfile",
    "CallableProfile",
]

QUAD_ABS_TOL = 1e-12


def _adaptive_quad(fn, a: float, b: float, breakpoints=()) -> float:
    """Quadrature of ``fn`` on [a, b] with failure detection."""
    if b <= a:
        return 0.0
    interior = [p for p in breakpoints if a < p < b]
    with warnings.catch_warnings():
        # poor convergence is reported via QuadratureFailure below
        warnings.simplefilter("ignore", IntegrationWarning)
        value, err = quad(
            fn, a, b,
            points=interior or None,
            epsabs=1e-13,
            epsrel=1e-11,
            limit=200,
        )
    if err > max(QUAD_ABS_TOL, 1e-9 * abs(value)):
        raise QuadratureFailure(
            f"quadrature error estimate {err:.3e} exceeds tolerance on "
            f"[{a}, {b}]"
        )
    return value


def _shifted_poly_antiderivative(coeffs, shift: float, x: float) -> float:
    """Antiderivative of ``sum_r coeffs[r] (u - shift)^r`` at ``u = x``."""
    v = x - shift
    total = 0.0
    for r, c in enumerate(coeffs):
        if c != 0.0:
            total += c * v ** (r + 1) / (r + 1)
    return total


class VolatilityProfile:
    """Base class: a positive function on [0, 1] with integral queries."""

    kind = "callable"

    def __init__(self, lower: float, upper: float, breakpoints=()):
        if not 0.0 < lower <= upper:
            raise ValueError("bounds must satisfy 0 < lower <= upper")
        self.lower = float(lower)
        self.upper = float(upper)
        self.breakpoints = tuple(float(p) for p in breakpoints)

    def eval(self, t):
        raise NotImplementedError

    def __call__(self, t):
        return self.eval(t)

    def poly_integral(self, a: float, b: float, shift: float, coeffs) -> float:
        """``integral_a^b sum_r coeffs[r] (u - shift)^r * sigma^2(u) du``."""

        def integrand(u):
            v = u - shift
            p = 0.0
            for r, c in enumerate(coeffs):
                p += c * v**r
            return p * float(self.eval(u))

        return _adaptive_quad(integrand, a, b, self.breakpoints)

    def moment_integral(self, power: int, a: float, b: float) -> float:
        """``integral_a^b u^power * sigma^2(u) du``."""
        coeffs = [0.0] * power + [1.0]
        return self.poly_integral(a, b, 0.0, coeffs)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "lower": self.lower, "upper": self.upper}


class ConstantProfile(VolatilityProfile):
    """``sigma^2(t) = value`` everywhere; all integrals in closed form."""

    kind = "constant"

    def __init__(self, value: float):
        super().__init__(value, value)
        self.value = float(value)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.value)
        return float(out) if out.ndim == 0 else out

    def poly_integral(self, a, b, shift, coeffs):
        if b <= a:
            return 0.0
        return self.value * (
            _shifted_poly_antiderivative(coeffs, shift, b)
            - _shifted_poly_antiderivative(coeffs, shift, a)
        )

    def descriptor(self):
        return {"kind": self.kind, "value": self.value}


class PiecewiseConstantProfile(VolatilityProfile):
    """Step function: ``values[k]`` on the k-th interval between breaks.

    ``breaks`` are the interior jump points (strictly increasing, inside
    (0, 1)); ``values`` has one more entry than ``breaks``.
    """

    kind = "piecewise"

    def __init__(self, breaks, values):
        breaks = tuple(float(x) for x in breaks)
        values = tuple(float(v) for v in values)
        if len(values) != len(breaks) + 1:
            raise ValueError("need exactly len(breaks) + 1 values")
        if any(x <= 0.0 or x >= 1.0 for x in breaks) or list(breaks) != sorted(set(breaks)):
            raise ValueError("breaks must be strictly increasing inside (0, 1)")
        if min(values) <= 0.0:
            raise ValueError("piecewise values must be positive")
        super().__init__(min(values), max(values), breakpoints=breaks)
        self.breaks = breaks
        self.values = values
        self._edges = np.array((0.0,) + breaks + (1.0,))

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, t, side="right"), 0, len(self.values) - 1)
        out = np.asarray(self.values, dtype=float)[idx]
        return float(out) if out.ndim == 0 else out

    def poly_integral(self, a, b, shift, coeffs):
        if b <= a:
            return 0.0
        total = 0.0
        for k, v in enumerate(self.values):
            lo = max(a, self._edges[k])
            hi = min(b, self._edges[k + 1])
            if hi > lo:
                total += v * (
                    _shifted_poly_antiderivative(coeffs, shift, hi)
                    - _shifted_poly_antiderivative(coeffs, shift, lo)
                )
        # extend the outer pieces beyond [0, 1] if the query overshoots
        if a < 0.0:
            total += self.values[0] * (
                _shifted_poly_antiderivative(coeffs, shift, min(b, 0.0))
                - _shifted_poly_antiderivative(coeffs, shift, a)
            )
        if b > 1.0:
            total += self.values[-1] * (
                _shifted_poly_antiderivative(coeffs, shift, b)
                - _shifted_poly_antiderivative(coeffs, shift, max(a, 1.0))
            )
        return total

    def descriptor(self):
        return {"kind": self.kind, "breaks": list(self.breaks), "values": list(self.values)}


class CallableProfile(VolatilityProfile):
    """Wrap an arbitrary positive function; integrals go through quadrature."""

    kind = "callable"

    def __init__(self, fn, lower: float, upper: float, breakpoints=()):
        super().__init__(lower, upper, breakpoints)
        self._fn = fn

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self._fn(t), dtype=float)
        return float(out) if out.ndim == 0 else out
