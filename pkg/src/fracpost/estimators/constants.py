"""Gamma function and the analytic constants of the stability estimates."""
from __future__ import annotations

import math

from ..core import ConfigError


def gamma_fn(x: float) -> float:
    """Gamma(x) for x > 0 (libm's tgamma, accurate to a few ulp)."""
    if not x > 0:
        raise ValueError(f"gamma_fn needs x > 0, got {x}")
    return math.gamma(x)


def const_C_alpha_T(alpha: float, T: float) -> float:
    return gamma_fn(1 - alpha) * T ** (alpha + 1) / 2 ** alpha


def const_C_alpha_phi(alpha: float, theta: float = math.pi / 4):
    """Return (phi, C_{alpha,phi}) with phi = max(0, pi - (pi - theta)/alpha)."""
    if not 0 < theta < math.pi / 2:
        raise ConfigError(f"theta out of (0, pi/2): {theta}", [("theta", theta, "out of range")])
    phi = max(0.0, math.pi - (math.pi - theta) / alpha)
    c = math.cos(phi)
    if c <= 0:
        raise ConfigError("theta too small for this alpha", [("theta", theta, "cos(phi) <= 0")])
    return phi, c ** (alpha - 1) * gamma_fn(1 - alpha) / math.pi
