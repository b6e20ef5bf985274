"""Tiny least-squares helpers shared by the probe and experiment modules."""

from __future__ import annotations

import numpy as np

__all__ = ["ols_slope"]


def ols_slope(x, y) -> tuple[float, float]:
    """Slope and its standard error from the simple regression of y on x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two same-length samples with >= 2 points")
    xc = x - x.mean()
    sxx = float(np.sum(xc * xc))
    if sxx == 0.0:
        raise ValueError("x values are all identical")
    slope = float(np.sum(xc * y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = max(x.size - 2, 1)
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx))
    return slope, stderr
