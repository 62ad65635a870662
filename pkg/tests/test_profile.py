"""Tests for the closed-form profile layer.

Frozen oracle values, fixed before implementation:

- p=q=3: Gamma = gamma = 2^(-1/2) (symmetric case reduces to
  Gamma^(p-1) = 1/(p-1)); mu=1 gives b = 1/6, c1 = 1/48, D = E = Gamma/6;
  mu=2 gives b = 1/9, D = 7 Gamma/36.
- Base profile at p=q=3, mu=1, z=1: Gamma (7/6)^(-1/2) = 0.6546536707079771.
- Boundedness constants below (5.0, 1.0) were measured at build time
  (worst observed 2.77 and 0.17 over the parameter grid) and frozen with
  headroom; they assert uniform-in-s boundedness, not sharpness.
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import PARAM_GRID, SMALL_GRID
from rdblowup.core import ConfigurationError, DomainCoverageError, Params
from rdblowup.profile import (
    Constants,
    FieldPair,
    Grid,
    b_selection_residual,
    constants,
    cutoff,
    final_profile,
    intermediate_profile,
    nonlinear_F,
    potential_leading,
    potential_V,
    profile_star,
    residual_R,
    residual_leading,
)
from rdblowup.profile import _profile_star_derivs


class TestConstants:
    def test_symmetric_cubic(self):
        c = constants(Params(3.0, 3.0, 1.0))
        assert_allclose([c.Gamma, c.gamma], [2**-0.5, 2**-0.5], rtol=1e-14)
        assert_allclose(c.b, 1.0 / 6.0, rtol=1e-14)
        assert_allclose(c.c1, 1.0 / 48.0, rtol=1e-14)
        assert_allclose([c.D, c.E], [2**-0.5 / 6.0, 2**-0.5 / 6.0], rtol=1e-14)

    def test_symmetric_cubic_mu2(self):
        c = constants(Params(3.0, 3.0, 2.0))
        assert_allclose(c.b, 1.0 / 9.0, rtol=1e-14)
        assert_allclose(c.D, 7.0 * 2**-0.5 / 36.0, rtol=1e-14)

    @pytest.mark.parametrize("params", PARAM_GRID, ids=str)
    def test_defining_pair_residuals(self, params):
        c = constants(params)
        r1 = c.gamma**params.p * params.pq1 / (c.Gamma * (params.p + 1)) - 1.0
        r2 = c.Gamma**params.q * params.pq1 / (c.gamma * (params.q + 1)) - 1.0
        assert abs(r1) < 1e-12 and abs(r2) < 1e-12

    @pytest.mark.parametrize("params", PARAM_GRID, ids=str)
    def test_b_positive_and_mu1_relation(self, params):
        c = constants(params)
        assert c.b > 0 and c.c1 > 0
        if params.mu == 1.0:
            assert_allclose(c.b, params.pq1 * c.c1, rtol=1e-14)

    @pytest.mark.parametrize("params", SMALL_GRID, ids=str)
    def test_b_selection(self, params):
        c = constants(params)
        assert abs(b_selection_residual(c.b, params)) < 1e-10
        for factor in (0.99, 1.01):
            assert abs(b_selection_residual(factor * c.b, params)) > 1e-4


class TestProfileStar:
    def test_center_values(self):
        for params in SMALL_GRID:
            c = constants(params)
            pu, pv = profile_star(0.0, c, params)
            assert_allclose([float(pu), float(pv)], [c.Gamma, c.gamma], rtol=1e-14)

    def test_cubic_at_z1(self):
        params = Params(3.0, 3.0, 1.0)
        pu, _ = profile_star(1.0, constants(params), params)
        assert_allclose(float(pu), 0.6546536707079771, rtol=1e-14)

    def test_positive_decreasing(self):
        params = Params(2.0, 5.0, 0.5)
        c = constants(params)
        z = np.linspace(0, 50, 1001)
        pu, pv = profile_star(z, c, params)
        assert np.all(pu > 0) and np.all(pv > 0)
        assert np.all(np.diff(pu) < 0) and np.all(np.diff(pv) < 0)

    def test_far_field_exponents(self):
        params = Params(2.0, 3.0, 1.0)
        c = constants(params)
        z = np.array([1e5, 1e6])
        pu, pv = profile_star(z, c, params)
        slope_u = (np.log(pu[1]) - np.log(pu[0])) / (np.log(z[1]) - np.log(z[0]))
        slope_v = (np.log(pv[1]) - np.log(pv[0])) / (np.log(z[1]) - np.log(z[0]))
        assert_allclose(slope_u, -2 * params.alpha_u, rtol=1e-6)
        assert_allclose(slope_v, -2 * params.alpha_v, rtol=1e-6)

    @pytest.mark.parametrize("params", SMALL_GRID, ids=str)
    def test_base_ode_residual(self, params):
        # -(z/2) Pu' - au*Pu + Pv^p and its partner vanish identically.
        c = constants(params)
        z = np.linspace(0.0, 5.0, 50)
        pu, pv = profile_star(z, c, params)
        du, dv, _, _ = _profile_star_derivs(z, c, params)
        res1 = -0.5 * z * du - params.alpha_u * pu + pv**params.p
        res2 = -0.5 * z * dv - params.alpha_v * pv + pu**params.q
        assert float(np.max(np.abs(res1))) < 1e-9
        assert float(np.max(np.abs(res2))) < 1e-9

    def test_derivatives_against_finite_differences(self):
        params = Params(2.0, 5.0, 0.5)
        c = constants(params)
        z = np.linspace(-3, 3, 41)
        h = 1e-5
        du, dv, ddu, ddv = _profile_star_derivs(z, c, params)
        pu_p, pv_p = profile_star(z + h, c, params)
        pu_m, pv_m = profile_star(z - h, c, params)
        pu, pv = profile_star(z, c, params)
        assert_allclose(du, (pu_p - pu_m) / (2 * h), atol=1e-9)
        assert_allclose(dv, (pv_p - pv_m) / (2 * h), atol=1e-9)
        assert_allclose(ddu, (pu_p - 2 * pu + pu_m) / h**2, atol=1e-5)
        assert_allclose(ddv, (pv_p - 2 * pv + pv_m) / h**2, atol=1e-5)


class TestIntermediateProfile:
    def test_center_formula(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        phi, psi = intermediate_profile(0.0, 10.0, c, params)
        assert_allclose(float(phi), 2**-0.5 * (1 + 1.0 / 60.0), rtol=1e-14)
        assert_allclose(float(psi), 2**-0.5 * (1 + 1.0 / 60.0), rtol=1e-14)

    def test_large_s_limit(self):
        params = Params(2.0, 5.0, 0.5)
        c = constants(params)
        phi, psi = intermediate_profile(0.0, 1e12, c, params)
        assert_allclose([float(phi), float(psi)], [c.Gamma, c.gamma], rtol=1e-11)

    def test_rejects_bad_s(self):
        params = Params(3.0, 3.0, 1.0)
        with pytest.raises(ConfigurationError):
            intermediate_profile(0.0, -1.0, constants(params), params)


class TestPotential:
    def test_decays_pointwise(self):
        params = Params(3.0, 3.0, 2.0)
        c = constants(params)
        v1a, v2a = potential_V(1.0, 100.0, c, params)
        v1b, v2b = potential_V(1.0, 1e6, c, params)
        assert abs(float(v1b)) < abs(float(v1a)) / 100
        assert abs(float(v2b)) < abs(float(v2a)) / 100

    def test_center_leading_order(self):
        # V_u(0, s) ~ 1/(2s) for the symmetric cubic at mu=1.
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        s = 1e5
        v1, _ = potential_V(0.0, s, c, params)
        assert_allclose(float(v1), 1.0 / (2.0 * s), rtol=1e-3)

    def test_far_field_limits(self):
        params = Params(2.0, 5.0, 0.5)
        c = constants(params)
        v1, v2 = potential_V(1e12, 1e6, c, params)
        assert_allclose(float(v1), -params.p * c.gamma ** (params.p - 1), rtol=1e-6)
        assert_allclose(float(v2), -params.q * c.Gamma ** (params.q - 1), rtol=1e-6)

    @pytest.mark.parametrize("params", SMALL_GRID, ids=str)
    def test_leading_term_error_shape(self, params):
        # |V - leading| <= C (1+y^4)/s^2 uniformly in s; C frozen with headroom.
        c = constants(params)
        for s in (10.0, 100.0, 1e3, 1e4):
            y = np.linspace(-math.sqrt(s), math.sqrt(s), 801)
            v1, v2 = potential_V(y, s, c, params)
            l1, l2 = potential_leading(y, s, c, params)
            scale = (1.0 + y**4) / s**2
            assert float(np.max(np.abs(v1 - l1) / scale)) < 1.0
            assert float(np.max(np.abs(v2 - l2) / scale)) < 1.0

    def test_center_value_formula(self):
        for params in SMALL_GRID:
            p, q, mu = params.p, params.q, params.mu
            c = constants(params)
            s = 37.0
            l1, l2 = potential_leading(0.0, s, c, params)
            expect1 = 2 * c.b * p * (p - 1) * c.gamma ** (p - 1) * (q + mu) / (params.pq1 * s)
            expect2 = 2 * c.b * q * (q - 1) * c.Gamma ** (q - 1) * (p * mu + 1) / (params.pq1 * s)
            assert_allclose(float(l1), expect1, rtol=1e-13)
            assert_allclose(float(l2), expect2, rtol=1e-13)

    def test_symmetric_leading_equal(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        y = np.linspace(-2, 2, 9)
        l1, l2 = potential_leading(y, 50.0, c, params)
        assert_allclose(l1, l2, rtol=1e-14)


class TestNonlinearRemainder:
    def test_zero_perturbation(self):
        params = Params(2.0, 5.0, 0.5)
        c = constants(params)
        f1, f2 = nonlinear_F(0.0, 0.0, 1.0, 30.0, c, params)
        assert float(f1) == 0.0 and float(f2) == 0.0

    def test_single_side_zero(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        f1, f2 = nonlinear_F(1e-3, 0.0, 0.0, 50.0, c, params)
        assert float(f1) == 0.0 and float(f2) != 0.0

    def test_quadratic_coefficient_sweep(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        s = 50.0
        _, psi = intermediate_profile(0.0, s, c, params)
        expect = params.p * (params.p - 1) / 2.0 * float(psi) ** (params.p - 2)
        for ups in (1e-3, -1e-3, 5e-4):
            f1, _ = nonlinear_F(0.0, ups, 0.0, s, c, params)
            assert abs(float(f1) / ups**2 - expect) / expect < 0.01

    def test_quadratic_bound_inner_region(self):
        params = Params(3.0, 3.0, 2.0)
        c = constants(params)
        s, K = 25.0, 10.0
        y = np.linspace(-2 * K * math.sqrt(s), 2 * K * math.sqrt(s), 501)
        ups = 1e-2 * np.cos(y)
        lam = 1e-2 * np.sin(y)
        f1, f2 = nonlinear_F(lam, ups, y, s, c, params)
        assert float(np.max(np.abs(f1))) < 100.0 * np.max(ups**2)
        assert float(np.max(np.abs(f2))) < 100.0 * np.max(lam**2)


class TestResidual:
    @pytest.mark.parametrize("params", SMALL_GRID, ids=str)
    def test_uniform_s_bound(self, params):
        c = constants(params)
        K = 10.0
        worst = 0.0
        for s in (10.0, 31.6, 100.0, 1e3, 1e4):
            y = np.linspace(-2 * K * math.sqrt(s), 2 * K * math.sqrt(s), 2001)
            r1, r2 = residual_R(y, s, c, params)
            worst = max(worst, s * float(np.max(np.abs(r1))), s * float(np.max(np.abs(r2))))
        assert worst < 5.0

    @pytest.mark.parametrize("params", SMALL_GRID, ids=str)
    def test_leading_richardson(self, params):
        # s^2 R_i has a 1/s expansion; two-level Richardson with ratio 2
        # reaches the limit to ~1e-7.
        c = constants(params)
        for y in (0.0, 1.0, 2.0):
            ya = np.array(y, dtype=np.longdouble)
            for idx in (0, 1):
                vals = [float((residual_R(ya, s, c, params))[idx]) * s * s
                        for s in (4e3, 8e3, 1.6e4)]
                level1 = [2 * vals[1] - vals[0], 2 * vals[2] - vals[1]]
                limit = (4 * level1[1] - level1[0]) / 3.0
                closed = float(residual_leading(np.array(y), c, params)[idx])
                assert abs(limit - closed) < 1e-6

    def test_symmetric_leading_equal(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        y = np.linspace(-2, 2, 9)
        r1, r2 = residual_leading(y, c, params)
        assert_allclose(r1, r2, rtol=1e-14)

    def test_longdouble_pass_through(self):
        params = Params(3.0, 3.0, 2.0)
        c = constants(params)
        y = np.linspace(-5, 5, 11).astype(np.longdouble)
        r1, r2 = residual_R(y, 25.0, c, params)
        assert r1.dtype == np.longdouble and r2.dtype == np.longdouble
        r1d, r2d = residual_R(y.astype(float), 25.0, c, params)
        # float64 path has cancellation noise ~1e-16 absolute; the extended
        # path is the more accurate of the two.
        assert_allclose(r1.astype(float), r1d, rtol=1e-10, atol=1e-15)
        assert_allclose(r2.astype(float), r2d, rtol=1e-10, atol=1e-15)


class TestCutoff:
    def test_plateau_and_support(self):
        K, s = 10.0, 25.0
        assert cutoff(0.0, s, K) == 1.0
        assert cutoff(K * math.sqrt(s), s, K) == 1.0
        assert cutoff(2 * K * math.sqrt(s), s, K) == 0.0
        assert cutoff(-3 * K * math.sqrt(s), s, K) == 0.0
        mid = cutoff(1.5 * K * math.sqrt(s), s, K)
        assert 0.0 < mid < 1.0

    def test_monotone(self):
        y = np.linspace(0, 200, 4001)
        vals = cutoff(y, 25.0, 10.0)
        assert np.all(np.diff(vals) <= 1e-15)

    def test_outer_product_vanishes(self):
        # chi(2y, s) * (1 - chi(y, s)) == 0 everywhere: the doubled-argument
        # cutoff dies before the plain one starts to decay.
        y = np.linspace(-500, 500, 20001)
        s, K = 20.0, 10.0
        prod = cutoff(2 * y, s, K) * (1.0 - cutoff(y, s, K))
        assert float(np.max(np.abs(prod))) == 0.0

    def test_rejects_bad_args(self):
        with pytest.raises(ConfigurationError):
            cutoff(1.0, -1.0, 10.0)
        with pytest.raises(ConfigurationError):
            cutoff(1.0, 1.0, 0.0)


class TestFieldTypes:
    def test_grid_nodes_antisymmetric(self):
        g = Grid(y_max=155.0, n=4096)
        y = g.nodes()
        assert y.shape == (4096,)
        assert_allclose(y + y[::-1], 0.0, atol=0.0)
        assert_allclose(y[1] - y[0], g.step, rtol=1e-12)

    def test_field_pair_validation(self):
        g = Grid(y_max=10.0, n=11)
        ok = FieldPair(g, np.zeros(11), np.zeros(11), 20.0, "PhiPsi")
        assert ok.s == 20.0
        with pytest.raises(ConfigurationError):
            FieldPair(g, np.zeros(10), np.zeros(11), 20.0, "PhiPsi")
        with pytest.raises(ConfigurationError):
            FieldPair(g, np.full(11, np.nan), np.zeros(11), 20.0, "PhiPsi")
        with pytest.raises(ConfigurationError):
            FieldPair(g, np.zeros(11), np.zeros(11), 20.0, "other")


class TestFinalProfile:
    def test_domain_error(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        with pytest.raises(DomainCoverageError):
            final_profile(0.5, c, params)
        with pytest.raises(DomainCoverageError):
            final_profile(0.0, c, params)

    def test_cubic_value(self):
        params = Params(3.0, 3.0, 1.0)
        c = constants(params)
        x = 1e-3
        u, v = final_profile(x, c, params)
        arg = (1.0 / 6.0) * x * x / (2.0 * abs(math.log(x)))
        assert_allclose(u, 2**-0.5 * arg**-0.5, rtol=1e-14)
        assert_allclose(v, u, rtol=1e-14)

    def test_scaling_rearrangement(self):
        params = Params(2.0, 5.0, 0.5)
        c = constants(params)
        for x in (1e-4, 1e-6, 1e-8):
            u, _ = final_profile(x, c, params)
            scaled = u * abs(x) ** (2 * params.alpha_u) * abs(math.log(abs(x))) ** (-params.alpha_u)
            assert_allclose(scaled, c.Gamma * (c.b / 2.0) ** (-params.alpha_u), rtol=1e-12)
