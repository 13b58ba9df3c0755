"""Computable estimator terms.

Two families live here:

* ``eta_*``: the triangle-inequality bounds in which every elliptic
  reconstruction is split as R v = v + (R - I) v and ||(R - I) v|| is replaced
  by a residual indicator.  These feed the assembled bounds.
* ``direct_*``: the same space-time norms evaluated by quadrature of the
  combined vector expression with R replaced by the identity.  These keep the
  cancellation between neighbouring steps and are what the CLI reports.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import beta as beta_fn, betainc

from ..l1_stepper import Trajectory, power_diff
from ..reconstruct import ReconPack
from .coefficients import CoefficientTable, moment
from .quadrature import composite_nodes


def _interp_time(traj: Trajectory, tq: np.ndarray) -> np.ndarray:
    """U_h at the points tq (shape (N, q)); returns (N, q, m)."""
    nodes = traj.tmesh.nodes
    k = traj.tmesh.steps
    lam = (tq - nodes[:-1, None]) / k[:, None]
    return (1 - lam)[..., None] * traj.U[:-1, None, :] + lam[..., None] * traj.U[1:, None, :]


# --- data and true errors ---------------------------------------------------------

def true_error_L1L2(spec, traj: Trajectory, npts: int = 3) -> float:
    """int_0^T ||u - U_h|| dt (Gauss in time, 5-point Gauss per element in space)."""
    if spec.exact is None:
        from ..core import ConfigError
        raise ConfigError("true error needs the exact solution", [("exact", None, "missing")])
    S = traj.space
    tq, wt = composite_nodes(traj.tmesh.nodes, npts)
    Uq = _interp_time(traj, tq)
    total = 0.0
    for n in range(traj.N):
        for i in range(npts):
            e = S.sample(spec.exact, tq[n, i]) - S.at_quad(Uq[n, i])
            total += wt[n, i] * S.l2_norm_fun(e)
    return float(total)


def _f_errors(spec, traj: Trajectory, tq: np.ndarray, hat_first: bool) -> np.ndarray:
    """||f(t) - f_h(t)|| at the points tq, f_h piecewise constant (or linear on I_1)."""
    S = traj.space
    nodes = traj.tmesh.nodes
    out = np.zeros(tq.shape)
    Fq = S.at_quad(traj.F)
    for n in range(traj.N):
        for i in range(tq.shape[1]):
            t = tq[n, i]
            if hat_first and n == 0:
                lam = t / nodes[1]
                fh = (1 - lam) * Fq[0] + lam * Fq[1]
            else:
                fh = Fq[n + 1]
            out[n, i] = S.l2_norm_fun(S.sample(spec.source, t) - fh)
    return out


def eta_data_f(spec, traj: Trajectory, npts: int = 3) -> float:
    """(int_0^T ||f - f_h^n||^2 dt)^(1/2)."""
    tq, wt = composite_nodes(traj.tmesh.nodes, npts)
    e = _f_errors(spec, traj, tq, hat_first=False)
    return float(np.sqrt(np.sum(wt * e ** 2)))


def data_f_L1_hat(spec, traj: Trajectory, npts: int = 3) -> float:
    """int_0^T ||E_f|| dt with the linear interpolant of f_h^0, f_h^1 on I_1."""
    tq, wt = composite_nodes(traj.tmesh.nodes, npts)
    return float(np.sum(wt * _f_errors(spec, traj, tq, hat_first=True)))


def initial_errors(spec, traj: Trajectory, step: float = 1e-4):
    """(||rho(0)||, ||A rho(0)||).

    ||rho(0)|| <= ||u0 - U^0|| + E_e0(U^0); A R U^0 = A_h U^0 so
    A rho(0) = A u0 - A_h U^0 with A u0 = -(A u0')' by central differences.
    """
    S = traj.space
    x = S.xq
    u0 = S.sample(spec.initial)
    rho0 = float(S.l2_norm_fun(u0 - S.at_quad(traj.U[0])) + S.Ee0(traj.U[0]))

    def flux(y):
        d = (np.asarray(spec.initial(y + step), dtype=float)
             - np.asarray(spec.initial(y - step), dtype=float)) / (2 * step)
        return np.asarray(spec.diffusion(y), dtype=float) * d

    Au0 = -(flux(x + step) - flux(x - step)) / (2 * step)
    Arho0 = float(S.l2_norm_fun(Au0 - S.at_quad(traj.AU[0])))
    return rho0, Arho0


# --- bound forms --------------------------------------------------------------------

def frac_terms(traj: Trajectory, table: CoefficientTable):
    """Per-interval contributions to the fractional-mismatch bound, index n=1..N."""
    S = traj.space
    e0 = S.Ee0(traj.U)
    dn = S.l2_norm(np.diff(traj.U, axis=0))
    N = traj.N
    j = np.arange(1, N + 1)
    el = (e0[j] + e0[j - 1])[:, None]
    per_n = (table.C2[1:, 1:] * el + np.abs(table.C3[1:, 1:]) * dn[:, None]).sum(axis=0)
    out = np.zeros(N + 1)
    out[1:] = per_n
    return out


def eta_frac_mismatch(traj: Trajectory, pack: ReconPack, table: CoefficientTable, start: int = 1) -> float:
    return float(frac_terms(traj, table)[start:].sum())


def eta_space_EU(traj: Trajectory, table: CoefficientTable, start: int = 1) -> float:
    S = traj.space
    D = np.diff(traj.U, axis=0)
    terms = table.C4[1:] * (S.Ee1(D) ** 2 + S.h1_norm(D) ** 2)
    return float(np.sqrt(np.sum(terms[start - 1:])))


def first_interval_quadratic(traj: Trajectory, pack: ReconPack) -> float:
    """int_0^{t_1} of the energy norm squared of the first-interval difference,
    closed form with the discrete surrogates D1, B0, B1."""
    a = traj.alpha
    k1 = traj.tmesh.steps[0]
    e = traj.space.energy
    D, B0, B1 = pack.D1, pack.B0, pack.B1
    ga1, ga2 = math.gamma(a + 1), math.gamma(a + 2)
    val = (k1 / 3 * e(D, D)
           - 2 * k1 ** (a + 1) / ((a + 2) * ga1) * e(D, B0)
           - 2 * k1 ** (a + 1) / ((a + 3) * ga2) * e(D, B1)
           + k1 ** (2 * a + 1) / ((2 * a + 1) * ga1 ** 2) * e(B0, B0)
           + k1 ** (2 * a + 1) / ga2 ** 2 * e(B0, B1)
           + k1 ** (2 * a + 1) / ((2 * a + 3) * ga2 ** 2) * e(B1, B1))
    return max(float(val), 0.0)


def eta_UR_Uhat(traj: Trajectory, pack: ReconPack, table: CoefficientTable = None) -> float:
    S = traj.space
    k = traj.tmesh.steps
    k1 = k[0]
    first = math.sqrt(first_interval_quadratic(traj, pack)) + math.sqrt(k1 / 3) * float(S.Ee1(pack.D1))
    total = first ** 2
    if traj.N >= 2:
        dU = pack.dU
        e1 = S.Ee1(dU)
        h1 = S.h1_norm(dU)
        n = np.arange(2, traj.N + 1)
        kn, kp = k[n - 1], k[n - 2]
        w = kn ** 5 / (30 * (kn + kp) ** 2)
        total += float(np.sum(w * 4 * (e1[n] ** 2 + e1[n - 1] ** 2 + h1[n] ** 2 + h1[n - 1] ** 2)))
    return math.sqrt(total)


def EI_terms(traj: Trajectory):
    """Midpoint value of the interval integrand of the A U_R - A_h U^n bound, n=1..N."""
    S = traj.space
    U, AU = traj.U, traj.AU
    e0A = S.Ee0(AU)
    res = S.Eres(U[:-1] + U[1:])
    dA = S.l2_norm(AU[:-1] - AU[1:])
    out = np.zeros(traj.N + 1)
    out[1:] = 0.5 * (e0A[:-1] + e0A[1:] + res + dA)
    return out


def eta_EI(traj: Trajectory) -> float:
    k = traj.tmesh.steps
    return float(np.sum(k[1:] * EI_terms(traj)[2:]))


def W_bound_norms(traj: Trajectory, pack: ReconPack) -> np.ndarray:
    """B(W^n) = E_e0(W^n) + ||W^n|| (fixed mesh), zero for n < 2."""
    S = traj.space
    B = S.Ee0(pack.W) + S.l2_norm(pack.W)
    B[:2] = 0.0
    return B


def eta_EW(traj: Trajectory, pack: ReconPack, table: CoefficientTable) -> float:
    if traj.N < 2:
        return 0.0
    S = traj.space
    B = W_bound_norms(traj, pack)
    hist = float(np.sum(table.C7 * B[:, None]))
    own = float(np.sum(table.C8 * B))
    first = (table.C9 * float(S.l2_norm(pack.B1)) + table.C10 * float(S.l2_norm(pack.B0))
             + table.C11 * (pack.Ee0["D1"] + float(S.l2_norm(pack.D1))))
    return hist + own + first


# --- first-interval history weights -------------------------------------------------

def first_interval_weights(alpha: float, t, t1: float, k1: float):
    """Coefficients (c0, c1, cd) such that the I_1 contribution to the quadratic
    reconstruction correction at t > t_1 is c0*B0 + c1*B1 + cd*D1."""
    t = np.asarray(t, dtype=float)
    x = np.clip(t1 / t, 0.0, 1.0)
    J1 = t * betainc(alpha + 1, 1 - alpha, x) * beta_fn(alpha + 1, 1 - alpha)
    J0 = betainc(alpha, 1 - alpha, x) * beta_fn(alpha, 1 - alpha)
    g1 = math.gamma(1 - alpha)
    c1 = J1 / (math.gamma(alpha + 1) * k1 * g1)
    c0 = J0 / (math.gamma(alpha) * g1)
    a1 = power_diff(t, t1, 1 - alpha) / math.gamma(2 - alpha)
    return c0, c1, -a1 / k1


# --- direct surrogates --------------------------------------------------------------

def direct_frac(traj: Trajectory, pack: ReconPack, npts: int = 5, start: int = 1) -> float:
    """int ||dbar^alpha U^n - d^alpha U_h(t)|| dt, U_h piecewise linear."""
    a = traj.alpha
    nodes = traj.tmesh.nodes
    k = traj.tmesh.steps
    N = traj.N
    tq, wt = composite_nodes(nodes, npts)
    g2 = math.gamma(2 - a)
    S = traj.space
    total = 0.0
    for n in range(max(start, 1), N + 1):
        tau = tq[n - 1]
        j = np.arange(1, n + 1)
        lo = tau[:, None] - nodes[j - 1][None, :]
        kj = np.broadcast_to(k[j - 1], lo.shape)
        aj = power_diff(lo, np.minimum(kj, lo), 1 - a) / g2
        coef = traj.weights[n, j][None, :] - aj / k[j - 1]
        vec = coef @ np.diff(traj.U[: n + 1], axis=0)
        total += float(np.sum(wt[n - 1] * S.l2_norm(vec)))
    return total


def direct_EU(traj: Trajectory, start: int = 1) -> float:
    """(int ||U^n - U_h(t)||_1^2 dt)^(1/2) = (sum k_n/3 ||U^n - U^{n-1}||_1^2)^(1/2)."""
    D = np.diff(traj.U, axis=0)
    terms = traj.tmesh.steps / 3 * traj.space.h1_norm(D) ** 2
    return float(np.sqrt(np.sum(terms[start - 1:])))


def direct_EUhat(traj: Trajectory, pack: ReconPack) -> float:
    """(int ||U_h - hat U_h||_1^2 dt)^(1/2) with the first-interval surrogate."""
    k = traj.tmesh.steps
    total = first_interval_quadratic(traj, pack)
    if traj.N >= 2:
        h1 = traj.space.h1_norm(pack.W[2:])
        total += float(np.sum(k[1:] ** 5 / 120 * h1 ** 2))
    return math.sqrt(total)


def W_vectors(traj: Trajectory, pack: ReconPack, tq: np.ndarray, n: int, include_first: bool):
    """Quadratic-reconstruction correction vectors at the points tq inside I_n (n >= 2)."""
    a = traj.alpha
    nodes = traj.tmesh.nodes
    k = traj.tmesh.steps
    g2, g3 = math.gamma(2 - a), math.gamma(3 - a)
    tau = tq - nodes[n - 1]
    own = -k[n - 1] * tau ** (1 - a) / (2 * g2) + tau ** (2 - a) / g3
    vec = own[:, None] * pack.W[n][None, :]
    if n > 2:
        j = np.arange(2, n)
        m = moment(tq[:, None], nodes[j - 1][None, :], nodes[j][None, :], a)
        vec = vec + m @ pack.W[2:n]
    if include_first:
        c0, c1, cd = first_interval_weights(a, tq, nodes[1], k[0])
        vec = vec + c0[:, None] * pack.B0 + c1[:, None] * pack.B1 + cd[:, None] * pack.D1
    return vec


def direct_EW(traj: Trajectory, pack: ReconPack, include_first: bool = False, npts: int = 5) -> float:
    """int_{t_1}^T ||W(t)|| dt.

    ``include_first=False`` keeps only the interior history (j >= 2) and the
    running interval; the first-interval fractional-integral terms are added
    when ``include_first`` is set.
    """
    if traj.N < 2:
        return 0.0
    tq, wt = composite_nodes(traj.tmesh.nodes, npts)
    S = traj.space
    total = 0.0
    for n in range(2, traj.N + 1):
        vec = W_vectors(traj, pack, tq[n - 1], n, include_first)
        total += float(np.sum(wt[n - 1] * S.l2_norm(vec)))
    return total
