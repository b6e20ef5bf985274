import numpy as np

from mnlab.linalg import sym


def rand_sym(rng, n, scale=1.0):
    return sym(scale * rng.standard_normal((n, n)))


def rand_psd(rng, n, extra=4, floor=0.0):
    w = rng.standard_normal((n, n + extra))
    return sym(w @ w.T / (n + extra) + floor * np.eye(n))
