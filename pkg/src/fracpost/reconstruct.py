"""Time reconstructions of the discrete solution.

The elliptic reconstruction is never formed; formulas use its discrete
counterpart and the residual indicators account for the difference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .l1_stepper import Trajectory, eval_Uh


@dataclass
class ReconPack:
    dU: np.ndarray      # row n: (U^n - U^{n-1})/k_n, n >= 1 (row 0 zero)
    W: np.ndarray       # row n: hat W^n for n >= 2 (rows 0, 1 zero)
    D1: np.ndarray      # U^1 - U^0
    B0: np.ndarray      # f_h^0 - A_h U^0
    B1: np.ndarray      # f_h^1 - f_h^0 - A_h (U^1 - U^0)
    slope: np.ndarray   # D1 / k_1
    const_term: np.ndarray  # B0 / Gamma(alpha+1)
    lin_term: np.ndarray    # B1 / (Gamma(alpha+2) k_1)
    Ee0: dict           # companion indicators of D1, B0, B1


def divided_differences(traj: Trajectory):
    k = traj.tmesh.steps
    dU = np.zeros_like(traj.U)
    dU[1:] = np.diff(traj.U, axis=0) / k[:, None]
    W = np.zeros_like(traj.U)
    if traj.N >= 2:
        W[2:] = 2 * (dU[2:] - dU[1:-1]) / (k[1:] + k[:-1])[:, None]
    return dU, W


def hat_W(traj: Trajectory, n: int) -> np.ndarray:
    if not 2 <= n <= traj.N:
        raise ValueError(f"hat W^n needs 2 <= n <= N, got n={n}")
    k = traj.tmesh.steps
    d1 = (traj.U[n] - traj.U[n - 1]) / k[n - 1]
    d0 = (traj.U[n - 1] - traj.U[n - 2]) / k[n - 2]
    return 2 * (d1 - d0) / (k[n - 1] + k[n - 2])


def first_interval_terms(traj: Trajectory, spec=None) -> dict:
    alpha = traj.alpha
    k1 = traj.tmesh.steps[0]
    D1 = traj.U[1] - traj.U[0]
    B0 = traj.F[0] - traj.AU[0]
    B1 = traj.F[1] - traj.F[0] - (traj.AU[1] - traj.AU[0])
    S = traj.space
    return dict(
        D1=D1, B0=B0, B1=B1,
        slope=D1 / k1,
        const_term=B0 / math.gamma(alpha + 1),
        lin_term=B1 / (math.gamma(alpha + 2) * k1),
        Ee0={"D1": float(S.Ee0(D1)), "B0": float(S.Ee0(B0)), "B1": float(S.Ee0(B1))},
    )


def build_recon_pack(traj: Trajectory) -> ReconPack:
    dU, W = divided_differences(traj)
    return ReconPack(dU=dU, W=W, **first_interval_terms(traj))


def eval_Uhat(traj: Trajectory, pack: ReconPack, t: float) -> np.ndarray:
    """U_h(t) + (t - t_{n-1})(t - t_n) W^n / 2 on I_n, n >= 2."""
    nodes = traj.tmesh.nodes
    if t <= nodes[1]:
        raise ValueError("t <= t_1: use eval_Uhat_first on the first interval")
    n = traj.interval(t)
    return eval_Uh(traj, t) + 0.5 * (t - nodes[n - 1]) * (t - nodes[n]) * pack.W[n]


def eval_Uhat_first(traj: Trajectory, pack: ReconPack, t: float) -> np.ndarray:
    """Discrete surrogate of the fractional-integral reconstruction on [0, t_1]."""
    if not 0 <= t <= traj.tmesh.nodes[1]:
        raise ValueError("eval_Uhat_first needs 0 <= t <= t_1")
    a = traj.alpha
    return (eval_Uh(traj, t) - t * pack.slope + t ** a * pack.const_term
            + t ** (a + 1) * pack.lin_term)
