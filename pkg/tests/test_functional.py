"""Variational constants: minimization, interpolation, brackets, heat/Nash."""

import math

import mpmath
import numpy as np
import pytest
import scipy.optimize

from ineqlab import (aizenman_lieb_factor, build_laplacian, clr_bounds_from_S,
                     continuum_sobolev_d3, heat_bound_check, lieb_bound_from_K,
                     lieb_objective, ltw_bounds_from_S, make_lattice,
                     nash_check, sobolev_constant, sobolev_interp_constant,
                     tau_min_value)
from ineqlab.functional import aizenman_lieb_unminimized
from ineqlab.operators import KineticOperator, build_magnetic_laplacian, uniform_flux_phases

mpmath.mp.dps = 30

# reference minima, cross-checked against multi-start L-BFGS on the raw
# Rayleigh quotient (agreement at or below 1.5e-13 relative)
REFERENCE_S = [
    (dict(d=1, extents=16), 4.0, 0.11289120949871466),
    (dict(d=1, extents=32), 6.0, 0.06627347694804109),
    (dict(d=2, extents=(8, 8)), 4.0, 1.340223404615804),
    (dict(d=3, extents=(3, 3, 3)), 10.0 / 3.0, 4.45811085681244),
]


def single_site_op(t0=2.0, m0=3.0):
    sp = make_lattice(d=1, extents=1)
    return KineticOperator(sp, np.array([[t0]]), measure=np.array([m0]))


def test_sobolev_single_site_closed_form():
    t0, m0, q = 2.0, 3.0, 4.0
    S, trace = sobolev_constant(single_site_op(t0, m0), q)
    assert S == pytest.approx(t0 * m0 ** (-2.0 / q), rel=1e-12)
    assert trace.residual <= 1e-10
    assert not trace.vacuous


def test_sobolev_reference_values():
    for kw, q, want in REFERENCE_S:
        T = build_laplacian(make_lattice(bc="dirichlet", h=1.0, **kw))
        S, trace = sobolev_constant(T, q)
        assert S == pytest.approx(want, rel=1e-9), (kw, q)
        assert trace.residual <= 1e-9
        assert trace.certificate_slack is not None
        assert trace.certificate_slack >= -1e-9


def test_sobolev_scaling_homogeneity():
    T = build_laplacian(make_lattice(d=1, extents=16))
    S1, _ = sobolev_constant(T, 4.0)
    S2, _ = sobolev_constant(T.scaled(3.7), 4.0)
    assert S2 == pytest.approx(3.7 * S1, rel=1e-9)


def test_sobolev_two_site_against_scan():
    # two-site path: nonnegative minimizers live on a quarter circle, so a
    # bounded scalar minimization is an independent oracle
    op = build_laplacian(make_lattice(d=1, extents=2))
    q = 4.0

    def quotient(phi):
        u = np.array([math.cos(phi), math.sin(phi)])
        t = float(u @ (op.form @ u))
        return t / float(np.sum(np.abs(u) ** q)) ** (2.0 / q)

    res = scipy.optimize.minimize_scalar(quotient, bounds=(1e-6, math.pi / 2),
                                         method="bounded",
                                         options={"xatol": 1e-12})
    S, _ = sobolev_constant(op, q)
    assert S == pytest.approx(res.fun, rel=1e-9)
    assert S == pytest.approx(math.sqrt(2.0), rel=1e-10)


def test_sobolev_kernel_is_vacuous():
    T = build_laplacian(make_lattice(d=1, extents=8, bc="periodic"))
    S, trace = sobolev_constant(T, 4.0)
    assert S == 0.0
    assert trace.vacuous


def test_sobolev_rejects_bad_input():
    T = build_laplacian(make_lattice(d=1, extents=4))
    with pytest.raises(ValueError):
        sobolev_constant(T, 2.0)
    sp = make_lattice(d=2, extents=3, bc="periodic")
    TA = build_magnetic_laplacian(sp, uniform_flux_phases(sp, 0.3))
    with pytest.raises(ValueError):
        sobolev_constant(TA, 4.0)


def test_interp_limit_recovers_sobolev():
    T = build_laplacian(make_lattice(d=1, extents=16))
    q = 4.0
    S, _ = sobolev_constant(T, q)
    ic = sobolev_interp_constant(T, q, 1.0 - 1e-6)
    assert ic.value == pytest.approx(S, rel=1e-3)


def test_interp_two_routes_agree():
    T = build_laplacian(make_lattice(d=1, extents=16))
    ic = sobolev_interp_constant(T, 4.0, 0.5)
    assert ic.direct_value is not None
    assert ic.rel_gap is not None and ic.rel_gap <= 1e-6
    assert ic.tau_star > 0.0
    assert not ic.vacuous


def test_interp_scaling_homogeneity():
    T = build_laplacian(make_lattice(d=1, extents=12))
    theta = 0.5
    a = sobolev_interp_constant(T, 4.0, theta, with_direct=False)
    b = sobolev_interp_constant(T.scaled(3.0), 4.0, theta, with_direct=False)
    assert b.value == pytest.approx(3.0**theta * a.value, rel=1e-9)


def test_interp_vacuous_on_kernel():
    T = build_laplacian(make_lattice(d=1, extents=8, bc="periodic"))
    ic = sobolev_interp_constant(T, 4.0, 0.5)
    assert ic.value == 0.0 and ic.vacuous


def test_tau_min_closed_form():
    tm = tau_min_value(1.0, 1.0, 0.5)
    assert tm.value == pytest.approx(2.0, rel=1e-14)
    assert tm.tau_star == pytest.approx(1.0, rel=1e-14)
    rng = np.random.default_rng(12)
    for _ in range(10):
        alpha = float(rng.uniform(0.1, 10.0))
        beta = float(rng.uniform(0.1, 10.0))
        theta = float(rng.uniform(0.05, 0.95))
        tm = tau_min_value(alpha, beta, theta)
        taus = np.geomspace(tm.tau_star * 1e-3, tm.tau_star * 1e3, 20_001)
        grid = np.min(alpha * taus ** (theta - 1.0) + beta * taus**theta)
        assert tm.value == pytest.approx(float(grid), rel=1e-7)
        # stationarity
        f = lambda t: alpha * t ** (theta - 1.0) + beta * t**theta
        assert f(tm.tau_star) <= f(tm.tau_star * 1.001)
        assert f(tm.tau_star) <= f(tm.tau_star * 0.999)
    with pytest.raises(ValueError):
        tau_min_value(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        tau_min_value(1.0, 1.0, 1.0)


def test_nash_single_site_equality():
    op = single_site_op(t0=2.0, m0=3.0)
    q = 4.0
    S, _ = sobolev_constant(op, q)
    rep = nash_check(op, q, S, n_samples=200)
    assert rep.passed
    assert rep.min_slack_rel == pytest.approx(0.0, abs=1e-10)


def test_nash_on_path():
    T = build_laplacian(make_lattice(d=1, extents=16))
    S, _ = sobolev_constant(T, 4.0)
    rep = nash_check(T, 4.0, S, n_samples=2000)
    assert rep.passed and rep.min_slack_rel >= -1e-10


def test_nash_vacuous():
    T = build_laplacian(make_lattice(d=1, extents=8, bc="periodic"))
    rep = nash_check(T, 4.0, 0.0)
    assert rep.vacuous and rep.passed


def test_heat_bound_single_site_sharp_value():
    lam, kappa = 2.0, 1.5
    op = single_site_op(t0=lam, m0=1.0)
    q = 2.0 * kappa / (kappa - 1.0)
    S, _ = sobolev_constant(op, q)
    assert S == pytest.approx(lam, rel=1e-12)
    s_grid = np.geomspace(1e-3 / lam, 50.0 / lam, 4001)
    rep = heat_bound_check(op, kappa, S, s_grid=s_grid)
    # sup_s s^k e^(-s lam) = (k/lam)^k e^-k, so the measured/bound ratio is e^-k
    assert rep.K_measured == pytest.approx((kappa / lam) ** kappa * math.exp(-kappa),
                                           rel=1e-4)
    assert rep.K_bound == pytest.approx((kappa / lam) ** kappa, rel=1e-13)
    assert rep.passed_1inf and rep.passed_12


def test_heat_bound_on_path():
    T = build_laplacian(make_lattice(d=1, extents=16))
    kappa = 1.5
    S, _ = sobolev_constant(T, 2.0 * kappa / (kappa - 1.0))
    rep = heat_bound_check(T, kappa, S)
    assert rep.passed_1inf and rep.passed_12
    assert rep.K_measured <= rep.K_bound * (1.0 + 1e-8)
    with pytest.raises(ValueError):
        heat_bound_check(T, kappa, 0.0)
    with pytest.raises(ValueError):
        heat_bound_check(T, 0.0, S)


def test_counting_brackets():
    lo, hi = clr_bounds_from_S(1.0, 2.0)
    assert lo == pytest.approx(1.0) and hi == pytest.approx(math.e, rel=1e-14)
    lo, hi = clr_bounds_from_S(2.0, 1.5)
    assert lo == pytest.approx(2.0**-1.5, rel=1e-14)
    assert hi / lo == pytest.approx(math.exp(0.5), rel=1e-14)
    # the weak bracket at gamma = 0 degenerates to the counting bracket
    assert ltw_bounds_from_S(2.0, 0.0, 1.5) == pytest.approx(clr_bounds_from_S(2.0, 1.5))
    lo, hi = ltw_bounds_from_S(2.0, 1.0, 1.5)
    theta = 1.5 / 2.5
    s_eff = 2.0 / (theta**theta * (1 - theta) ** (1 - theta))
    assert lo == pytest.approx(s_eff**-2.5, rel=1e-13)
    assert hi / lo == pytest.approx(math.exp(1.5), rel=1e-13)
    with pytest.raises(ValueError):
        clr_bounds_from_S(0.0, 1.5)
    with pytest.raises(ValueError):
        ltw_bounds_from_S(1.0, 0.5, 0.4)


def test_lieb_objective_against_mpmath():
    for a, K, kappa in [(1.0, 1.0, 2.0), (0.25, 0.5, 1.5), (3.0, 2.0, 2.5)]:
        denom = 1.0 - float(a * mpmath.exp(a) * mpmath.e1(a))
        want = K / (kappa * (kappa - 1.0)) * a ** (1.0 - kappa) * math.exp(a) / denom
        assert lieb_objective(a, K, kappa) == pytest.approx(want, rel=1e-12)
    with pytest.raises(ValueError):
        lieb_objective(0.0, 1.0, 2.0)


def test_lieb_bound_matches_scalar_oracle():
    K, kappa = (4.0 * math.pi) ** -1.5, 1.5
    lb = lieb_bound_from_K(K, kappa)
    res = scipy.optimize.minimize_scalar(
        lambda la: lieb_objective(math.exp(la), K, kappa),
        bounds=(math.log(1e-3), math.log(10.0)), method="bounded",
        options={"xatol": 1e-13})
    assert lb.value == pytest.approx(res.fun, rel=1e-9)
    assert lb.a_star == pytest.approx(math.exp(res.x), rel=1e-6)
    assert lb.unimodal
    # linear in K
    lb2 = lieb_bound_from_K(2.0 * K, kappa)
    assert lb2.value == pytest.approx(2.0 * lb.value, rel=1e-10)
    with pytest.raises(ValueError):
        lieb_bound_from_K(K, 1.0)
    with pytest.raises(ValueError):
        lieb_bound_from_K(0.0, 1.5)


def test_lieb_bound_reference_point():
    lb = lieb_bound_from_K((4.0 * math.pi) ** -1.5, 1.5)
    assert lb.value == pytest.approx(0.1156219174140979, rel=1e-10)
    assert lb.a_star == pytest.approx(0.24721890573152816, rel=1e-6)


def test_aizenman_lieb_factor_rational_point():
    assert aizenman_lieb_factor(1.0, 2.0, 1.5) == pytest.approx(16.0 / 7.0, rel=1e-12)


def test_aizenman_lieb_factor_is_minimum_of_unminimized():
    for g, gt, k in [(1.0, 2.0, 1.5), (0.5, 1.25, 2.0), (2.0, 3.5, 1.2)]:
        res = scipy.optimize.minimize_scalar(
            lambda s: aizenman_lieb_unminimized(g, gt, k, s),
            bounds=(1e-9, 1.0 - 1e-9), method="bounded",
            options={"xatol": 1e-13})
        assert aizenman_lieb_factor(g, gt, k) == pytest.approx(res.fun, rel=1e-9)
        s_star = (gt - g) / gt
        assert aizenman_lieb_unminimized(g, gt, k, s_star) == pytest.approx(
            aizenman_lieb_factor(g, gt, k), rel=1e-12)


def test_aizenman_lieb_validation_and_pole():
    assert aizenman_lieb_factor(1.0, 1.0 + 1e-6, 1.5) > 1e4
    with pytest.raises(ValueError):
        aizenman_lieb_factor(1.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        aizenman_lieb_factor(0.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        aizenman_lieb_unminimized(1.0, 2.0, 1.5, 0.0)


def test_continuum_sharp_constant_value():
    assert continuum_sobolev_d3() == pytest.approx(3.0 * (math.pi / 2.0) ** (4.0 / 3.0),
                                                   rel=1e-15)
