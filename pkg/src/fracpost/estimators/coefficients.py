"""Time-integrated kernel coefficients used by the computable estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import TimeMesh
from ..l1_stepper import power_diff, weight_matrix
from .quadrature import jacobi01, legendre01


class EstimatorQuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CoefficientTable:
    """Arrays indexed [j, n] with 1-based step indices (row/col 0 unused)."""

    C1: np.ndarray
    C2: np.ndarray
    C3: np.ndarray
    C4: np.ndarray
    C7: np.ndarray
    C8: np.ndarray
    C9: float
    C10: float
    C11: float


def moment(t, a, b, alpha):
    """m(t) = int_a^b omega_{1-alpha}(t - s) (s - (a+b)/2) ds for t >= b (vectorized).

    Far from the interval the closed form cancels badly, so the Peano form
    alpha/(2 Gamma(1-alpha)) int_a^b (s-a)(b-s)(t-s)^(-1-alpha) ds is used there.
    """
    t, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (t, a, b)))
    k = b - a
    out = np.empty(t.shape)
    far = (t - b) >= 4 * k
    g1, g2, g3 = math.gamma(1 - alpha), math.gamma(2 - alpha), math.gamma(3 - alpha)
    if np.any(far):
        x, w = legendre01(8)
        af, kf, tf = a[far][:, None], k[far][:, None], t[far][:, None]
        s = af + kf * x
        vals = (s - af) * (af + kf - s) * (tf - s) ** (-1 - alpha)
        out[far] = alpha / (2 * g1) * kf[:, 0] * (vals @ w)
    near = ~far
    if np.any(near):
        ta, tb, kn = t[near] - a[near], t[near] - b[near], k[near]
        out[near] = (-kn / (2 * g2) * (tb ** (1 - alpha) + ta ** (1 - alpha))
                     + power_diff(ta, kn, 2 - alpha) / g3)
    return out


def _moment_integral(alpha, a, b, lo, hi):
    """int_lo^hi m(t) dt for b <= lo (one interval pair)."""
    k = b - a
    kn = hi - lo
    g1 = math.gamma(1 - alpha)
    if lo - b >= k:
        # t-integral in closed form, s-integral by Gauss-Legendre
        x, w = legendre01(16)
        s = a + k * x
        xl = lo - s
        D = -(xl ** -alpha) * np.expm1(-alpha * np.log1p(kn / xl))
        return float(k * np.sum(w * (s - a) * (b - s) * D) / (2 * g1))
    g3, g4 = math.gamma(3 - alpha), math.gamma(4 - alpha)
    trap = (power_diff(hi - b, kn, 2 - alpha) + power_diff(hi - a, kn, 2 - alpha)) * k / (2 * g3)
    exact = (power_diff(hi - a, kn, 3 - alpha) - power_diff(hi - b, kn, 3 - alpha)) / g4
    return float(exact - trap)


def build_coefficients(tmesh: TimeMesh, alpha: float) -> CoefficientTable:
    t = tmesh.nodes
    k = tmesh.steps
    N = tmesh.N
    T = t[-1]
    g2, g3, g4 = math.gamma(2 - alpha), math.gamma(3 - alpha), math.gamma(4 - alpha)

    W = weight_matrix(tmesh, alpha)          # W[n, j] = a_j(t_n)/k_j
    C1 = np.zeros((N + 1, N + 1))
    C2 = np.zeros((N + 1, N + 1))
    for n in range(1, N + 1):
        j = np.arange(1, n + 1)
        C1[j, n] = k[n - 1] * W[n, j]
        jj = j[:-1]
        if len(jj):
            x_hi = t[n] - t[jj - 1]
            x_lo = t[n - 1] - t[jj - 1]
            C2[jj, n] = (power_diff(x_hi, k[jj - 1], 2 - alpha)
                         - power_diff(x_lo, k[jj - 1], 2 - alpha)) / (g3 * k[jj - 1])
        C2[n, n] = k[n - 1] ** (1 - alpha) / g3
    C3 = C1 - C2

    C4 = np.zeros(N + 1)
    C4[1:] = 2 * k / 3

    C7 = np.zeros((N + 1, N + 1))
    for n in range(3, N + 1):
        for j in range(2, n):
            C7[j, n] = _moment_integral(alpha, t[j - 1], t[j], t[n - 1], t[n])
    C8 = np.zeros(N + 1)
    C8[2:] = k[1:] * k[1:] ** (2 - alpha) / (2 * g3) + k[1:] ** (3 - alpha) / g4

    t1 = t[1]
    if N >= 2:
        ga, g1a = math.gamma(alpha), math.gamma(1 - alpha)
        # t-integration done in closed form: int_{t1}^T (t-s)^(-alpha) dt
        #   = [(T-s)^(1-alpha) - (t1-s)^(1-alpha)]/(1-alpha)
        x, w = jacobi01(24, 0.0, alpha)               # weight s^alpha on [0, 1]
        s = t1 * x
        I9a = t1 ** (alpha + 1) * np.sum(w * (T - s) ** (1 - alpha))
        xb, wb = jacobi01(4, 1 - alpha, alpha)         # weight (1-s)^(1-alpha) s^alpha
        I9b = t1 ** 2 * np.sum(wb)
        C9 = (I9a - I9b) / ((1 - alpha) * g1a * math.gamma(alpha + 1) * k[0])
        x, w = jacobi01(24, 0.0, alpha - 1)           # weight s^(alpha-1)
        s = t1 * x
        I10a = t1 ** alpha * np.sum(w * (T - s) ** (1 - alpha))
        xb, wb = jacobi01(4, 1 - alpha, alpha - 1)
        I10b = t1 * np.sum(wb)
        C10 = (I10a - I10b) / ((1 - alpha) * g1a * ga)
        _check_refinement(alpha, t1, T, C9 * (1 - alpha) * g1a * math.gamma(alpha + 1) * k[0],
                          C10 * (1 - alpha) * g1a * ga)
        C11 = (power_diff(T, t1, 2 - alpha) - t1 ** (2 - alpha)) / (g3 * k[0])
    else:
        C9 = C10 = C11 = 0.0
    return CoefficientTable(C1, C2, C3, C4, C7, C8, float(C9), float(C10), float(C11))


def _check_refinement(alpha, t1, T, I9, I10):
    """Compare against a doubled Gauss-Jacobi rule; raise if the rules disagree."""
    for p, ref in ((alpha, I9), (alpha - 1, I10)):
        x, w = jacobi01(48, 0.0, p)
        s = t1 * x
        wb = jacobi01(4, 1 - alpha, p)[1]
        val = t1 ** (p + 1) * (np.sum(w * (T - s) ** (1 - alpha)) - t1 ** (1 - alpha) * np.sum(wb))
        if abs(val - ref) > 1e-10 * abs(val):
            raise EstimatorQuadratureError(f"Gauss-Jacobi rule not converged ({val} vs {ref})")
