import dataclasses
import math
import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad
from scipy.special import beta, betainc

from fracpost.cli import example_problem
from fracpost.core import ConfigError, make_graded_time_mesh
from fracpost.estimators import (bound_cor1, bound_thm2_pointwise, build_coefficients,
                                 compute_report, const_C_alpha_phi, const_C_alpha_T,
                                 cor1_coefficients, direct_EU, direct_EUhat, direct_frac,
                                 eta_frac_mismatch, gamma_fn, kernel_convolution, moment)
from fracpost.estimators.terms import first_interval_weights
from fracpost.reconstruct import build_recon_pack
from conftest import run, scaled_problem, zero_problem

G = math.gamma


def _q(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200, **kw)[0]


@pytest.mark.parametrize("r", [1.0, 3.0])
@pytest.mark.parametrize("a", [0.25, 0.75])
def test_coefficients_vs_adaptive_quadrature(r, a):
    N = 5
    tm = make_graded_time_mesh(1.0, N, r)
    t, k = tm.nodes, tm.steps
    C = build_coefficients(tm, a)
    for n in range(2, N + 1):
        for j in range(1, n):
            # C2: int_{I_n} int_{I_j} omega_{1-a}(t-s) ds dt / k_j
            o = _q(lambda tt: _q(lambda s: (tt - s) ** (-a), t[j - 1], t[j]), t[n - 1], t[n])
            o /= G(1 - a) * k[j - 1]
            assert C.C2[j, n] == pytest.approx(o, rel=1e-10)
            if j >= 2:
                pe = lambda tt: a / (2 * G(1 - a)) * _q(
                    lambda s: (s - t[j - 1]) * (t[j] - s) * (tt - s) ** (-1 - a), t[j - 1], t[j])
                assert C.C7[j, n] == pytest.approx(_q(pe, t[n - 1], t[n]), rel=1e-10)
    t1, T, B1, B0 = t[1], 1.0, beta(a + 1, 2 - a), beta(a, 2 - a)
    o9 = (T ** 2 * betainc(a + 1, 2 - a, t1 / T) * B1 - t1 ** 2 * B1) / ((1 - a) * G(1 - a) * G(a + 1) * k[0])
    o10 = (T * betainc(a, 2 - a, t1 / T) * B0 - t1 * B0) / ((1 - a) * G(1 - a) * G(a))
    assert C.C9 == pytest.approx(o9, rel=1e-10)
    assert C.C10 == pytest.approx(o10, rel=1e-10)
    # a_j(t) decreases in t, so C1 <= C2 strictly above the diagonal
    assert np.all(np.triu(C.C3[1:, 1:], 1) <= 1e-15)
    assert np.allclose(np.diag(C.C3)[1:], k ** (1 - a) * (1 / G(2 - a) - 1 / G(3 - a)))


@pytest.mark.parametrize("a", [0.3, 0.8])
@pytest.mark.parametrize("t", [0.55, 0.6, 3.0])
def test_moment_vs_quadrature(a, t):
    lo, hi = 0.4, 0.5
    o = _q(lambda s: (t - s) ** (-a) * (s - 0.45), lo, hi) / G(1 - a)
    assert float(moment(t, lo, hi, a)) == pytest.approx(o, rel=1e-11, abs=1e-15)


def test_gamma_and_constants():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        gamma_fn(0.0)
    assert const_C_alpha_T(0.5, 1.0) == pytest.approx(math.sqrt(math.pi) / math.sqrt(2))
    phi, C = const_C_alpha_phi(0.5, math.pi / 4)
    assert phi == 0.0 and C == pytest.approx(math.sqrt(math.pi) / math.pi)
    phi, C = const_C_alpha_phi(0.9, math.pi / 4)
    assert phi == pytest.approx(math.pi / 6)
    assert C == pytest.approx((math.sqrt(3) / 2) ** -0.1 * G(0.1) / math.pi)
    with pytest.raises(ConfigError):
        const_C_alpha_phi(0.5, 2.0)


def test_cor1_coefficients_hand():
    w = cor1_coefficients(0.5, 1.0, 1.0)
    assert w["rho0"] == pytest.approx(2 ** 3.5 * 2)
    assert w["frac"] == pytest.approx(16 * math.pi)
    assert w["EU"] == pytest.approx(math.sqrt(2 * math.pi))
    assert w["f"] == pytest.approx(16 * math.pi)


def test_kernel_convolution():
    nodes = make_graded_time_mesh(1.0, 7, 2.0).nodes
    assert kernel_convolution(1.0, nodes, np.ones(7), 0.5) == pytest.approx(2.0, rel=1e-13)
    assert kernel_convolution(0.3, nodes, np.ones(7), 0.5) == pytest.approx(2 * math.sqrt(0.3))
    G_ = np.arange(1.0, 8.0)
    f = lambda s: G_[min(np.searchsorted(nodes, s) - 1, 6)] * (0.83 - s) ** (0.4 - 1)
    o = sum(_q(f, nodes[i], min(nodes[i + 1], 0.83)) for i in range(7) if nodes[i] < 0.83)
    assert kernel_convolution(0.83, nodes, G_, 0.4) == pytest.approx(o, rel=1e-9)


def test_first_interval_weight_oracle():
    a, t1, t = 0.35, 0.1, 0.7
    c0, c1, cd = first_interval_weights(a, np.array([t]), t1, t1)
    o0 = _q(lambda s: (t - s) ** (-a), 0, t1, weight="alg", wvar=(a - 1, 0)) / (G(a) * G(1 - a))
    o1 = _q(lambda s: (t - s) ** (-a), 0, t1, weight="alg", wvar=(a, 0)) / (G(a + 1) * t1 * G(1 - a))
    assert c0[0] == pytest.approx(o0, rel=1e-10)
    assert c1[0] == pytest.approx(o1, rel=1e-10)
    assert cd[0] == pytest.approx(-(t ** (1 - a) - (t - t1) ** (1 - a)) / (G(2 - a) * t1))


def test_direct_frac_linear_in_time(graded_traj):
    # U^n = t_n v: d^alpha U_h(t) = t^(1-a) v/Gamma(2-a), discrete value uses t_n
    v = np.linspace(0.5, 1.5, graded_traj.space.n)
    t = graded_traj.tmesh.nodes
    traj = dataclasses.replace(graded_traj, U=t[:, None] * v)
    a = traj.alpha
    lo, hi = t[:-1], t[1:]
    per = (hi - lo) * hi ** (1 - a) - (hi ** (2 - a) - lo ** (2 - a)) / (2 - a)
    ref = float(traj.space.l2_norm(v)) * per.sum() / G(2 - a)
    assert direct_frac(traj, build_recon_pack(traj), npts=12) == pytest.approx(ref, rel=1e-6)


def test_direct_EU_and_EUhat_closed_forms(graded_traj):
    S = graded_traj.space
    k = graded_traj.tmesh.steps
    D = np.diff(graded_traj.U, axis=0)
    # int_0^1 s^2 ds = 1/3 ; int ((t-a)(t-b)/2)^2 = k^5/120
    assert direct_EU(graded_traj) ** 2 == pytest.approx(float(np.sum(k / 3 * S.h1_norm(D) ** 2)))
    assert _q(lambda s: (s * (s - 0.3) / 2) ** 2, 0, 0.3) == pytest.approx(0.3 ** 5 / 120)
    pack = build_recon_pack(graded_traj)
    interior = float(np.sum(k[1:] ** 5 / 120 * S.h1_norm(pack.W[2:]) ** 2))
    assert direct_EUhat(graded_traj, pack) ** 2 >= interior


def test_eta_frac_single_step():
    spec = example_problem("smooth", 0.5)
    traj = run(spec, N=1, M=8)
    S = traj.space
    tab = build_coefficients(traj.tmesh, 0.5)
    C2 = 1 / G(2.5)
    C3 = 1 / G(1.5) - C2
    ref = C2 * float(S.Ee0(traj.U[1]) + S.Ee0(traj.U[0])) + abs(C3) * float(S.l2_norm(traj.U[1] - traj.U[0]))
    assert eta_frac_mismatch(traj, build_recon_pack(traj), tab) == pytest.approx(ref, rel=1e-14)


def _numbers(rep):
    d = rep.as_dict()
    out = {}
    for key, val in d.items():
        if key == "pointwise_t":
            continue
        if isinstance(val, list):
            for i, x in enumerate(val):
                out[f"{key}[{i}]"] = x
        elif val is not None:
            out[key] = val
    return out


def test_zero_data_nullity():
    spec = zero_problem(0.4)
    rep = compute_report(spec, run(spec, N=6, M=8, r=2.0))
    vals = _numbers(rep)
    assert len(vals) > 15
    for key, val in vals.items():
        assert abs(val) <= 1e-12, key
    assert rep.effectivity() == {}


def test_scaling_by_constant():
    base = example_problem("nonsmooth", 0.6)
    r1 = _numbers(compute_report(base, run(base, N=6, M=10)))
    sc = scaled_problem(base, 3.0)
    r3 = _numbers(compute_report(sc, run(sc, N=6, M=10)))
    for key in r1:
        assert r3[key] == pytest.approx(3.0 * r1[key], rel=1e-9), key


def test_bounds_dominate_true_error(smooth_traj):
    rep = compute_report(smooth_traj.spec, smooth_traj)
    eff = rep.effectivity()
    assert all(v >= 1 for v in eff.values())
    assert rep.thm5 >= rep.thm1 and rep.thm7 >= rep.thm3
    c = rep.components
    assert bound_cor1(c) > 0
    with pytest.raises(ValueError):
        bound_thm2_pointwise(c, 0.0)
    assert len(rep.pointwise_t) == len(rep.pointwise_thm2) == len(rep.pointwise_thm4)
