"""L1 weights, the fully discrete time march and evaluation of U_h(t)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ProblemSpec, SpaceMesh, TimeMesh
from .fem1d import FESpace, SingularSystemError, solve_tridiag_spd


class StepError(RuntimeError):
    def __init__(self, n: int, cause: Exception):
        super().__init__(f"solve failed at step {n}: {cause}")
        self.n = n


def power_diff(x, d, p):
    """x**p - (x-d)**p for 0 <= d <= x, without cancellation."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(x > 0, d / np.where(x > 0, x, 1.0), 1.0)
        out = -(x ** p) * np.expm1(p * np.log1p(-np.minimum(ratio, 1.0)))
    return np.where(x > 0, out, 0.0)


def l1_weights_at(nodes: np.ndarray, alpha: float, t: float, jmax: Optional[int] = None) -> np.ndarray:
    """Array (a_1(t), ..., a_jmax(t)); jmax defaults to the largest j with t_j <= t."""
    if jmax is None:
        jmax = int(np.searchsorted(nodes, t, side="right")) - 1
    lo = t - nodes[:jmax]
    k = np.diff(nodes[: jmax + 1])
    return power_diff(lo, k, 1 - alpha) / math.gamma(2 - alpha)


def l1_coefficient(j: int, t: float, mesh: TimeMesh, alpha: float) -> float:
    nodes = mesh.nodes
    if not 1 <= j <= mesh.N:
        raise ValueError(f"index j={j} out of range 1..{mesh.N}")
    if t < nodes[j]:
        raise ValueError(f"a_j(t) needs t >= t_j ({t} < {nodes[j]})")
    return float(power_diff(t - nodes[j - 1], nodes[j] - nodes[j - 1], 1 - alpha) / math.gamma(2 - alpha))


def weight_matrix(mesh: TimeMesh, alpha: float) -> np.ndarray:
    """W[n, j] = a_j(t_n)/k_j for 1 <= j <= n (zero elsewhere), shape (N+1, N+1)."""
    t = mesh.nodes
    N = mesh.N
    k = mesh.steps
    n_idx, j_idx = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    mask = (j_idx >= 1) & (j_idx <= n_idx)
    jj = np.where(mask, j_idx, 1)
    a = power_diff(t[n_idx] - t[jj - 1], k[jj - 1], 1 - alpha) / math.gamma(2 - alpha)
    return np.where(mask, a / k[jj - 1], 0.0)


@dataclass
class Trajectory:
    spec: ProblemSpec
    tmesh: TimeMesh
    space: FESpace
    U: np.ndarray          # (N+1, m)
    F: np.ndarray          # f_h^n = P0 f(t_n), (N+1, m)
    AU: np.ndarray         # A_h U^n, (N+1, m)
    residuals: np.ndarray  # scheme residual per step (index 0 unused)
    weights: np.ndarray    # a_j(t_n)/k_j

    @property
    def alpha(self) -> float:
        return self.spec.alpha

    @property
    def N(self) -> int:
        return self.tmesh.N

    def interval(self, t: float) -> int:
        """Index n with t in I_n = (t_{n-1}, t_n] (n=1 for t=0)."""
        nodes = self.tmesh.nodes
        if t < 0 or t > nodes[-1] * (1 + 1e-14):
            raise ValueError(f"t={t} outside [0, T]")
        return int(min(max(np.searchsorted(nodes, t, side="left"), 1), self.N))


def march(spec: ProblemSpec, tmesh: TimeMesh, smesh: SpaceMesh,
          space: Optional[FESpace] = None, U0: Optional[np.ndarray] = None) -> Trajectory:
    """Run the L1 / P1 scheme.  U^0 defaults to the nodal interpolant of u0."""
    space = space or FESpace(smesh, spec.diffusion, spec.diffusion_prime)
    N, m = tmesh.N, space.n
    alpha = spec.alpha
    t = tmesh.nodes
    Wt = weight_matrix(tmesh, alpha)
    U = np.zeros((N + 1, m))
    F = np.zeros((N + 1, m))
    U[0] = space.interpolate(spec.initial) if U0 is None else U0
    for n in range(N + 1):
        F[n] = space.project(lambda x, tn=t[n]: spec.source(x, tn))
    MF = space.M.matvec(F)
    MD = np.zeros((N + 1, m))     # M (U^j - U^{j-1}), row j
    res = np.zeros(N + 1)
    for n in range(1, N + 1):
        c = Wt[n, n]
        hist = Wt[n, 1:n] @ MD[1:n] if n > 1 else 0.0
        MU = space.M.matvec(U[n - 1])
        rhs = MF[n] + c * MU - hist
        try:
            U[n] = solve_tridiag_spd(space.M.scaled_add(c, space.K), rhs)
        except SingularSystemError as exc:
            raise StepError(n, exc) from exc
        MD[n] = space.M.matvec(U[n]) - MU
        r = c * MD[n] + hist + space.K.matvec(U[n]) - MF[n]
        res[n] = float(np.linalg.norm(r))
    AU = space.Ah(U)
    return Trajectory(spec, tmesh, space, U, F, AU, res, Wt)


def eval_Uh(traj: Trajectory, t: float) -> np.ndarray:
    n = traj.interval(t)
    a, b = traj.tmesh.nodes[n - 1], traj.tmesh.nodes[n]
    if t == b:
        return traj.U[n].copy()
    lam = (t - a) / (b - a)
    return (1 - lam) * traj.U[n - 1] + lam * traj.U[n]


def discrete_caputo(traj: Trajectory, n: int) -> np.ndarray:
    if not 1 <= n <= traj.N:
        raise ValueError(f"step n={n} out of range 1..{traj.N}")
    dU = np.diff(traj.U[: n + 1], axis=0)
    return traj.weights[n, 1 : n + 1] @ dU
