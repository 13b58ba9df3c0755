"""Quadrature rules and the weakly singular kernel convolution."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from ..l1_stepper import power_diff


@lru_cache(maxsize=None)
def legendre01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=None)
def jacobi01(n: int, a: float, b: float):
    """Nodes/weights on [0,1] for the weight (1-s)^a s^b."""
    x, w = roots_jacobi(n, a, b)
    return (x + 1) / 2, w / 2 ** (a + b + 1)


def composite_nodes(nodes: np.ndarray, npts: int):
    """Gauss-Legendre points and weights on every interval of ``nodes``; shapes (N, npts)."""
    g, w = legendre01(npts)
    k = np.diff(nodes)
    return nodes[:-1, None] + k[:, None] * g, k[:, None] * w


def kernel_convolution(t: float, nodes: np.ndarray, G: np.ndarray, alpha: float) -> float:
    """int_0^t (t - tau)^(alpha-1) G(tau) dtau for G piecewise constant (G[n-1] on I_n)."""
    a = nodes[:-1]
    b = np.minimum(nodes[1:], t)
    live = a < t
    a, b, G = a[live], b[live], np.asarray(G, dtype=float)[: live.sum()]
    return float(np.sum(G * power_diff(t - a, b - a, alpha)) / alpha)
