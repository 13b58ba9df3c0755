"""Assembled a posteriori bounds (unit convention for unknown constants)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..l1_stepper import Trajectory, power_diff
from ..reconstruct import ReconPack, eval_Uhat
from . import terms
from .coefficients import CoefficientTable, build_coefficients
from .constants import const_C_alpha_phi, const_C_alpha_T
from .quadrature import kernel_convolution


@dataclass
class Components:
    alpha: float
    T: float
    beta: float
    theta: float
    rho0: float
    Arho0: float
    eta_frac: float          # all intervals
    eta_frac_2: float        # intervals n >= 2
    eta_EU: float
    eta_EU_2: float
    eta_f: float             # L2 in time, piecewise-constant f_h
    Ef_L1_hat: float         # L1 in time, linear f_h on I_1
    eta_UR_Uhat: float
    eta_EI: float
    eta_EW: float
    max_Ee0_U: float
    Ee0_Uhat_int: float      # midpoint surrogate of int E_e0(hat U_h) dt
    time_recon: float        # sum k_n^3 ||W^n|| / 8
    nodes: np.ndarray = field(repr=False, default=None)
    G2: np.ndarray = field(repr=False, default=None)    # per-interval integrand, linear case
    G4: np.ndarray = field(repr=False, default=None)    # per-interval integrand, quadratic case
    Ee0_U: np.ndarray = field(repr=False, default=None)
    Ee0_Uhat_mid: np.ndarray = field(repr=False, default=None)
    W_norm: np.ndarray = field(repr=False, default=None)


def _midpoint_terms(spec, traj: Trajectory, pack: ReconPack, e0U, Arho0):
    """Per-interval (midpoint) values of the pointwise integrands."""
    S = traj.space
    a = traj.alpha
    nodes = traj.tmesh.nodes
    k = traj.tmesh.steps
    N = traj.N
    g2 = math.gamma(2 - a)
    mids = nodes[:-1] + k / 2
    dn = S.l2_norm(np.diff(traj.U, axis=0))
    EI = terms.EI_terms(traj)
    Bw = terms.W_bound_norms(traj, pack)
    Fq = S.at_quad(traj.F)
    frac = np.zeros(N + 1)
    f_pc = np.zeros(N + 1)
    f_hat = np.zeros(N + 1)
    ew = np.zeros(N + 1)
    aterm = np.zeros(N + 1)
    normB0 = float(S.l2_norm(pack.B0))
    normB1 = float(S.l2_norm(pack.B1))
    AhB0 = float(S.l2_norm(S.Ah(pack.B0)) + S.Eres(pack.B0))
    AhB1 = float(S.l2_norm(S.Ah(pack.B1)) + S.Eres(pack.B1))
    for n in range(1, N + 1):
        tau = mids[n - 1]
        j = np.arange(1, n + 1)
        lo = tau - nodes[j - 1]
        aj = power_diff(lo, np.minimum(k[j - 1], lo), 1 - a) / g2
        frac[n] = np.sum(np.abs(traj.weights[n, j] - aj / k[j - 1]) * dn[j - 1]
                         + aj / k[j - 1] * (e0U[j] + e0U[j - 1]))
        fv = S.sample(spec.source, tau)
        f_pc[n] = S.l2_norm_fun(fv - Fq[n])
        if n == 1:
            f_hat[n] = S.l2_norm_fun(fv - 0.5 * (Fq[0] + Fq[1]))
            aterm[n] = (0.5 * float(S.l2_norm(S.Ah(pack.D1)))
                        + tau ** a / math.gamma(a + 1) * AhB0
                        + tau ** (a + 1) / (math.gamma(a + 2) * k[0]) * AhB1)
            continue
        f_hat[n] = f_pc[n]
        # pointwise W bound at tau
        hist = 0.0
        if n > 2:
            jj = np.arange(2, n)
            m = terms.moment(tau, nodes[jj - 1], nodes[jj], a)
            hist = float(np.sum(np.abs(m) * Bw[jj]))
        s = tau - nodes[n - 1]
        own = (k[n - 1] * s ** (1 - a) / (2 * g2) + s ** (2 - a) / math.gamma(3 - a)) * Bw[n]
        c0, c1, cd = terms.first_interval_weights(a, np.array([tau]), nodes[1], k[0])
        first = (float(c0[0]) * normB0 + float(c1[0]) * normB1
                 + abs(float(cd[0])) * (pack.Ee0["D1"] + float(S.l2_norm(pack.D1))))
        ew[n] = hist + own + first
        vec = -0.5 * (traj.AU[n - 1] - traj.AU[n]) + k[n - 1] ** 2 / 8 * S.Ah(pack.W[n])
        aterm[n] = float(S.l2_norm(vec))
    G2 = frac + EI + f_pc + Arho0
    G2[0] = 0.0
    G4 = f_hat + np.where(np.arange(N + 1) >= 2, frac, 0.0) + ew + aterm + Arho0
    G4[0] = 0.0
    return G2, G4


def compute_components(spec, traj: Trajectory, pack: ReconPack, table: CoefficientTable = None) -> Components:
    table = table or build_coefficients(traj.tmesh, traj.alpha)
    S = traj.space
    k = traj.tmesh.steps
    nodes = traj.tmesh.nodes
    rho0, Arho0 = terms.initial_errors(spec, traj)
    e0U = S.Ee0(traj.U)
    W_norm = S.l2_norm(pack.W)
    mids = nodes[:-1] + k / 2
    Uhat_mid = np.empty_like(traj.U[1:])
    for n in range(1, traj.N + 1):
        if n == 1:
            Uhat_mid[0] = 0.5 * (traj.U[0] + traj.U[1])
        else:
            Uhat_mid[n - 1] = eval_Uhat(traj, pack, mids[n - 1])
    e0_hat = S.Ee0(Uhat_mid)
    G2, G4 = _midpoint_terms(spec, traj, pack, e0U, Arho0)
    return Components(
        alpha=traj.alpha, T=float(nodes[-1]), beta=S.beta, theta=spec.theta,
        rho0=rho0, Arho0=Arho0,
        eta_frac=terms.eta_frac_mismatch(traj, pack, table),
        eta_frac_2=terms.eta_frac_mismatch(traj, pack, table, start=2),
        eta_EU=terms.eta_space_EU(traj, table),
        eta_EU_2=terms.eta_space_EU(traj, table, start=2),
        eta_f=terms.eta_data_f(spec, traj),
        Ef_L1_hat=terms.data_f_L1_hat(spec, traj),
        eta_UR_Uhat=terms.eta_UR_Uhat(traj, pack, table),
        eta_EI=terms.eta_EI(traj),
        eta_EW=terms.eta_EW(traj, pack, table),
        max_Ee0_U=float(np.max(e0U)),
        Ee0_Uhat_int=float(np.sum(k * e0_hat)),
        time_recon=float(np.sum(k ** 3 * W_norm[1:]) / 8),
        nodes=nodes, G2=G2, G4=G4, Ee0_U=e0U, Ee0_Uhat_mid=e0_hat, W_norm=W_norm,
    )


# --- L1(L2) and L2(L2) bounds ----------------------------------------------------------

def bound_thm1(c: Components) -> float:
    a, T = c.alpha, c.T
    C = const_C_alpha_T(a, T)
    return (8 * math.sqrt(T ** (1 - a) * C / math.gamma(2 - a)) * c.rho0
            + 8 * math.sqrt(2) * C * c.eta_frac
            + 4 * c.beta * math.sqrt(C) * c.eta_EU
            + 8 * math.sqrt(T) * C * c.eta_f)


def cor1_coefficients(alpha: float, T: float, beta: float = 1.0) -> dict:
    g = math.gamma(1 - alpha)
    return {
        "rho0": 2 ** (4 - alpha) * g * T / math.gamma(2 - alpha),
        "frac": 2 ** (5 - 2 * alpha) * g ** 2 * T ** (2 * alpha + 1),
        "EU": 2 ** (1 - alpha) * g * beta ** 2 * T ** alpha,
        "f": 2 ** (5 - 2 * alpha) * g ** 2 * T ** (2 * alpha),
    }


def bound_cor1(c: Components) -> float:
    """Square root of the right-hand side bounding int ||rho||^2 dt."""
    w = cor1_coefficients(c.alpha, c.T, c.beta)
    return math.sqrt(w["rho0"] * c.rho0 ** 2 + w["frac"] * c.eta_frac ** 2
                     + w["EU"] * c.eta_EU ** 2 + w["f"] * c.eta_f ** 2)


def _residual_L1(c: Components) -> float:
    return c.Ef_L1_hat + c.eta_frac_2 + c.eta_EW


def bound_thm3(c: Components) -> float:
    a, T = c.alpha, c.T
    C = const_C_alpha_T(a, T)
    return (math.sqrt(48 * C * T ** (1 - a) / math.gamma(2 - a)) * c.rho0
            + 4 * math.sqrt(3) * C * _residual_L1(c)
            + 2 * math.sqrt(3 * C) * c.eta_UR_Uhat
            + 2 * c.beta * math.sqrt(6 * C) * c.eta_EU_2)


def bound_cor2(c: Components) -> float:
    a, T = c.alpha, c.T
    C = const_C_alpha_T(a, T)
    val = (16 * C / (math.gamma(2 - a) * T ** a) * c.rho0 ** 2
           + 4 * c.beta ** 2 * C / T * c.eta_EU_2 ** 2
           + 16 * C ** 2 / T * _residual_L1(c) ** 2
           + 4 * C / T * c.eta_UR_Uhat ** 2)
    return math.sqrt(val)


# --- pointwise bounds ---------------------------------------------------------------

def _pointwise(c: Components, G: np.ndarray, t: float) -> float:
    if not t > 0:
        raise ValueError(f"pointwise bound needs t > 0, got {t}")
    _, Cphi = const_C_alpha_phi(c.alpha, c.theta)
    conv = kernel_convolution(t, c.nodes, G[1:], c.alpha)
    return c.rho0 + Cphi / math.sin(c.theta) * conv


def bound_thm2_pointwise(c: Components, t: float) -> float:
    """Midpoint (piecewise-constant) surrogate of the linear-reconstruction L^inf(L2) bound."""
    return _pointwise(c, c.G2, t)


def bound_thm4_pointwise(c: Components, t: float) -> float:
    """Midpoint surrogate of the quadratic-reconstruction L^inf(L2) bound."""
    return _pointwise(c, c.G4, t)


def _interval_of(c: Components, t: float) -> int:
    return int(min(max(np.searchsorted(c.nodes, t, side="left"), 1), len(c.nodes) - 1))


def final_bounds(c: Components, t: float = None) -> dict:
    t = c.T if t is None else t
    n = _interval_of(c, t)
    k = c.nodes[n] - c.nodes[n - 1]
    return {
        "thm5": c.T * c.max_Ee0_U + bound_thm1(c),
        "thm6": max(c.Ee0_U[n], c.Ee0_U[n - 1]) + bound_thm2_pointwise(c, t),
        "thm7": c.Ee0_Uhat_int + c.time_recon + bound_thm3(c),
        "thm8": c.Ee0_Uhat_mid[n - 1] + k ** 2 * c.W_norm[n] / 8 + bound_thm4_pointwise(c, t),
    }
