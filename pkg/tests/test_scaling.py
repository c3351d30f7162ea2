import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from criticalnets import scaling as sc
from criticalnets.errors import DomainError

L = np.arange(1, 2001, dtype=float)


class TestExponents:
    def test_dp_ratio(self):
        assert sc.DP1D.decay == pytest.approx(0.15947, abs=1e-5)
        assert sc.MEANFIELD.decay == 1.0

    def test_validation(self):
        with pytest.raises(DomainError):
            sc.ScalingExponents(-1.0, 1.0)

    def test_lookup(self):
        assert sc.EXPONENTS["dp2d"] is sc.DP2D


class TestCurve:
    def test_orders_by_x(self):
        c = sc.Curve("a", [3.0, 2.0, 1.0], [1.0, 2.0, 3.0], [1, 2, 3])
        np.testing.assert_array_equal(c.x, [1, 2, 3])
        np.testing.assert_array_equal(c.layers, [3, 2, 1])


class TestRoundTrips:
    @given(st.floats(0.05, 2.0), st.floats(0.1, 3.0), st.sampled_from([sc.MEANFIELD, sc.DP1D, sc.DP2D]))
    @settings(max_examples=30, deadline=None)
    def test_offcritical(self, kappa, zeta, ex):
        rho = 1.0 / (1.0 + 0.3 * L)
        col = sc.rescale_offcritical([(L, rho)], ex, kappa, zeta, [-1e-3])
        l, r = sc.unrescale_offcritical(col.curves[0], ex, kappa)
        order = np.argsort(l)
        np.testing.assert_allclose(r[order], rho, rtol=1e-12)
        assert col.quality == 0.0

    @given(st.floats(0.05, 2.0), st.floats(1e-6, 1.0), st.booleans())
    @settings(max_examples=30, deadline=None)
    def test_initial_slip(self, kappa, rho0, si):
        rho = rho0 / (1.0 + rho0 * L)
        col = sc.rescale_initial_slip([(L, rho)], [rho0], kappa, scale_invariant=si)
        l, r = sc.unrescale_initial_slip(col.curves[0], kappa, si)
        np.testing.assert_allclose(r, rho, rtol=1e-12)

    @given(st.integers(10, 1000), st.booleans())
    @settings(max_examples=30, deadline=None)
    def test_finite_size(self, n, si):
        rho = np.exp(-L / n) / L
        col = sc.rescale_finite_size([(L, rho)], [n], scale_invariant=si)
        l, r = sc.unrescale_finite_size(col.curves[0], n, si)
        np.testing.assert_allclose(l, L, rtol=1e-14)
        np.testing.assert_allclose(r, rho, rtol=1e-12)

    def test_trace_objects(self):
        class T:
            rho_mean = np.array([0.5, 0.25, 0.125])
            label = "t"
        col = sc.rescale_finite_size([T()], [10])
        np.testing.assert_array_equal(col.curves[0].layers, [1, 2, 3])
        assert col.curves[0].label == "t"


def scaling_family(ex, kappa, zeta, taus, F):
    traces = []
    for tau in taus:
        kl = kappa * L
        x = kl ** (1 / ex.nu_par) * zeta * tau
        traces.append((L, kl ** -ex.decay * F(x)))
    return traces


class TestQuality:
    def test_exact_family_collapses(self):
        F = lambda x: np.exp(-np.abs(x)) * (1 + 0.5 * np.tanh(x)) + np.where(x > 0, x, 0)
        taus = [-3e-2, -1e-2, 1e-2, 3e-2]
        tr = scaling_family(sc.DP1D, 0.4, 1.5, taus, F)
        good = sc.rescale_offcritical(tr, sc.DP1D, 0.4, 1.5, taus)
        bad = sc.rescale_offcritical(tr, sc.MEANFIELD, 0.4, 1.5, taus)
        assert good.quality < 1e-5
        assert bad.quality > 100 * good.quality

    def test_single_curve_needs_flag(self):
        col = sc.ScalingCollapse([sc.Curve("a", L, 1 / L, L)])
        assert sc.collapse_quality(col, allow_single=True) == 0.0
        with pytest.raises(DomainError):
            sc.collapse_quality(col)

    def test_windows(self):
        a = sc.Curve("a", L, 1 / L, L)
        b = sc.Curve("b", L, np.where(L < 100, 2 / L, 1 / L), L)
        col = sc.ScalingCollapse([a, b])
        assert sc.collapse_quality(col) > 0
        assert sc.collapse_quality(col, l_window=(100, 2000)) == 0.0
        assert sc.collapse_quality(col, x_window=(100, 2000)) == 0.0

    def test_sign_change_rejected(self):
        col = sc.ScalingCollapse([sc.Curve("a", L - 10, 1 / L, L), sc.Curve("b", L, 1 / L, L)])
        with pytest.raises(DomainError):
            sc.collapse_quality(col)

    def test_mixed_classes_rejected(self):
        with pytest.raises(DomainError):
            sc.rescale_initial_slip([(L, 1 / L)] * 2, [0.1, 0.2], 0.2, scale_invariant=[True, False])


class TestPowerLaw:
    def test_recovers_exponent(self):
        f = sc.fit_power_law(L, 3.0 * L ** -0.16, window=(30, 1000))
        assert f.exponent == pytest.approx(-0.16, abs=1e-12)
        assert f.amplitude == pytest.approx(3.0, rel=1e-10)
        assert f.window == (30.0, 1000.0)

    def test_weighted(self, rng):
        rho = L ** -0.5 * (1 + 0.01 * rng.standard_normal(L.size))
        f = sc.fit_power_law(L, rho, stderr=0.01 * L ** -0.5)
        assert f.exponent == pytest.approx(-0.5, abs=5 * f.stderr + 1e-3)

    def test_guards(self):
        with pytest.raises(DomainError):
            sc.fit_power_law(L[:5], L[:5] ** -1.0)
        with pytest.raises(DomainError):
            sc.fit_power_law(L, np.zeros_like(L))


class TestFiniteSize:
    @pytest.mark.parametrize("si", [False, True])
    def test_solves_ode(self, si):
        n, mu, kappa, rho0 = 200, 0.66, 0.23, 0.4
        t = np.linspace(0, 1500, 31)

        def rhs(_, r):
            return -(mu / n) * r - (2 * kappa * r ** 1.5 if si else kappa * r * r)

        ref = integrate.solve_ivp(rhs, (0, t[-1]), [rho0], t_eval=t, rtol=1e-11, atol=1e-14).y[0]
        got = sc.finite_size_solution(t, n, mu, kappa, rho0, si)
        np.testing.assert_allclose(got, ref, rtol=1e-7)

    def test_critical_limits(self):
        # mu -> 0 recovers the infinite-width decay
        got = sc.finite_size_solution(L, 100, 1e-9, 0.2, 0.5)
        np.testing.assert_allclose(got, 0.5 / (1 + 0.5 * 0.2 * L), rtol=1e-6)

    @pytest.mark.parametrize("si", [False, True])
    @pytest.mark.parametrize("mu", [0.3, 0.66, 2.0])
    def test_fit_mu_recovers(self, si, mu, rng):
        n, kappa = 400, 0.233498
        rho = sc.finite_size_solution(L - 1, n, mu, kappa, 0.3, si)
        noisy = rho * np.exp(0.01 * rng.standard_normal(L.size))
        fit = sc.fit_mu((L, noisy), kappa, n=n, scale_invariant=si, rho0=0.3)
        assert fit.mu == pytest.approx(mu, rel=0.01)
        exact = sc.fit_mu((L, rho), kappa, n=n, scale_invariant=si)
        assert exact.mu == pytest.approx(mu, rel=1e-5)

    def test_needs_width(self):
        with pytest.raises(DomainError):
            sc.fit_mu((L, 1 / L), 0.2)
