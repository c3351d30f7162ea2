import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from criticalnets import activations as act
from criticalnets import meanfield as mf
from criticalnets import ntk
from criticalnets.errors import DomainError
from criticalnets.metric_factors import critical_point, omega

from conftest import hp


class TestKernel:
    def test_identical_inputs_at_criticality(self, erf_cp):
        s = ntk.critical_input_norm(erf_cp, 10)
        x = ntk.pair_with_distance(0.0, 10, s)[0]
        for L in (1, 10, 300):
            th = ntk.ntk_value(x, x, L, act.erf(), hp(erf_cp.sigma_w))
            assert th == pytest.approx(erf_cp.q_star * (L + 1), rel=1e-9)

    def test_distinct_inputs_one_third(self, erf_cp):
        n_in = 10
        w = omega(erf_cp.sigma_w, erf_cp.sigma_b, erf_cp.q_star, n_in)
        L = 2000
        assert w * 1.0 * erf_cp.kappa * L >= 100
        prof = ntk.ntk_profiles(erf_cp, [1.0], L, n_in=n_in)[0]
        assert prof.theta[-1] / (erf_cp.q_star * L) == pytest.approx(1 / 3, rel=0.05)

    def test_product_identity(self):
        L = 10_000
        fac = 1.0 - 2.0 / np.arange(1, L + 1)
        suffix = np.cumprod(fac[::-1])[::-1]
        assert suffix.sum() / L == pytest.approx(1 / 3, abs=1e-3)

    @pytest.mark.parametrize("scale,tol", [(1.0, 1e-12), (1.3, 1e-12), (2.0, 1e-9)])
    def test_symmetric(self, rng, scale, tol):
        x1, x2 = rng.standard_normal((2, 6))
        x2 *= scale
        p = hp(1.4)
        a = ntk.ntk_value(x1, x2, 25, act.tanh(), p)
        b = ntk.ntk_value(x2, x1, 25, act.tanh(), p)
        assert a == pytest.approx(b, rel=tol)

    def test_backward_matches_forward(self, tanh_cp):
        x1, x2 = ntk.pair_with_distance(0.3, 10, 1.0)
        tr = mf.meanfield_trace(x1, x2, act.tanh(), hp(tanh_cp.sigma_w), 201, with_deriv=True)
        prof = ntk.theta_profile(tr)
        for L in (1, 7, 50, 200):
            assert ntk.theta_from_trace(tr, L) == pytest.approx(prof[L - 1], rel=1e-12)

    def test_product_factor_near_criticality(self, tanh_cp):
        q = tanh_cp.q_star
        rho = 1e-4
        s = mf.MeanFieldState(q, q, q * (1 - rho), rho, 1)
        tr = mf.iterate(s, act.tanh(), hp(tanh_cp.sigma_w), 2, with_deriv=True)
        assert abs(tr.cdot[0] - (1 - 2 * tanh_cp.kappa * rho)) < 1e-6
        assert tr.C[1] == pytest.approx(q * (1 - tr.rho[1]), rel=1e-6)

    def test_trace_requirements(self):
        tr = mf.meanfield_trace([1.0, 0.0], [0.0, 1.0], act.tanh(), hp(1.4), 5)
        with pytest.raises(Exception, match="derivative"):
            ntk.theta_from_trace(tr, 2)
        with pytest.raises(DomainError):
            ntk.ntk_value([1.0], [1.0], 0, act.tanh(), hp(1.4))

    def test_matrix(self, rng):
        X = rng.standard_normal((4, 5))
        K = ntk.ntk_matrix(X, 10, act.tanh(), hp(1.4))
        np.testing.assert_array_equal(K.entries, K.entries.T)
        assert np.linalg.eigvalsh(K.entries)[0] > 0
        rows = ntk.ntk_rows(X[:2], X, 10, act.tanh(), hp(1.4))
        np.testing.assert_allclose(rows, K.entries[:2], rtol=1e-13)

    def test_matrix_validation(self):
        with pytest.raises(DomainError):
            ntk.NTKMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]), 1, hp(1.0))
        with pytest.raises(DomainError):
            ntk.NTKMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]), 1, hp(1.0))
        with pytest.raises(DomainError):
            ntk.NTKMatrix(np.array([[0.0, 0.0], [0.0, 1.0]]), 1, hp(1.0))


class TestCollapse:
    def test_single_profile_is_perfect(self, erf_cp):
        profs = ntk.ntk_profiles(erf_cp, [1e-2], 200)
        col = ntk.ntk_collapse(profs, erf_cp)
        assert col.quality == 0.0

    def test_mismatch(self, erf_cp, tanh_cp):
        profs = ntk.ntk_profiles(tanh_cp, [1e-2, 1e-1], 50)
        with pytest.raises(DomainError):
            ntk.ntk_collapse(profs, erf_cp)

    def test_scale_invariant_axis(self):
        cp = critical_point(act.relu())
        profs = ntk.ntk_profiles(cp, [1e-2], 100, input_sq_norm=1.0)
        col = ntk.ntk_collapse(profs, cp)
        L = np.arange(1, 101)
        np.testing.assert_allclose(np.sort(col.curves[0].x), 1e-2 * (cp.kappa * L) ** 2, rtol=1e-14)

    def test_pair_with_distance(self):
        x1, x2 = ntk.pair_with_distance(0.25, 4, 2.0)
        assert x1 @ x1 == pytest.approx(2.0) and x2 @ x2 == pytest.approx(2.0)
        assert 1 - x1 @ x2 / 2.0 == pytest.approx(0.25, rel=1e-14)
        with pytest.raises(DomainError):
            ntk.pair_with_distance(3.0, 4, 1.0)


class TestFavorableRange:
    def test_ratio(self):
        lo, hi = ntk.favorable_depth_range(0.05, 0.05, 1.0, 0.2)
        assert hi / lo == pytest.approx(100.0)

    def test_value(self):
        lo, _ = ntk.favorable_depth_range(0.01, 0.1, 1.0, 0.15)
        assert lo == pytest.approx(0.1 / 0.015)

    def test_kappa_scaling(self):
        a = ntk.favorable_depth_range(0.01, 0.1, 0.7, 0.2)
        b = ntk.favorable_depth_range(0.01, 0.1, 0.7, 0.1)
        np.testing.assert_allclose(b, 2 * np.array(a), rtol=1e-15)

    def test_identical_inputs_rejected(self):
        with pytest.raises(DomainError):
            ntk.favorable_depth_range(0.0, 0.1, 1.0, 0.2)


def _ode_reference(A, B, dy0, eta, N, t_grid):
    rate = 2 * eta / N
    n = len(dy0)

    def rhs(_, y):
        d = y[:n]
        return np.concatenate([-rate * A @ d, -rate * B @ d])

    sol = integrate.solve_ivp(rhs, (0, t_grid[-1]), np.concatenate([dy0, np.zeros(B.shape[0])]),
                              t_eval=t_grid, rtol=1e-11, atol=1e-13, method="DOP853")
    return sol.y[:n].T, sol.y[n:].T


class TestTraining:
    def test_identity_kernel(self):
        dy0 = np.array([1.0, -2.0, 0.5])
        t = np.linspace(0, 5, 6)
        res = ntk.solve_training_dynamics(np.eye(3) * 4.0, None, dy0, eta=0.3, t_grid=t)
        expected = np.exp(-2 * 0.3 * 4.0 * t / 3)[:, None] * dy0
        np.testing.assert_allclose(res.residuals, expected, rtol=1e-12)

    def test_rank_one_kernel(self):
        u = np.ones(4) / 2.0
        A = 8.0 * np.outer(u, u)
        dy0 = np.array([1.0, 0.0, 0.0, 0.0])
        res = ntk.solve_training_dynamics(A, None, dy0, eta=1.0, t_grid=[0.0, 1e3])
        frozen = dy0 - (u @ dy0) * u
        np.testing.assert_allclose(res.residuals[-1], frozen, atol=1e-12)

    def test_indicator_kernel_forgets_inputs(self, rng):
        N, M, qL = 5, 4, 300.0
        A = qL / 3 * np.ones((N, N)) + (qL - qL / 3) * np.eye(N)
        B = qL / 3 * (1 + 1e-4 * rng.standard_normal((M, N)))
        dy0 = rng.standard_normal(N)
        t = np.linspace(0, 2.0, 9)
        res = ntk.solve_training_dynamics(A, B, dy0, eta=0.05, t_grid=t)
        ref_r, ref_y = _ode_reference(A, B, dy0, 0.05, N, t)
        np.testing.assert_allclose(res.residuals, ref_r, atol=1e-8)
        np.testing.assert_allclose(res.test_outputs, ref_y, atol=1e-8)
        late = res.test_outputs[-1]
        assert np.ptp(late) < 0.01 * abs(late.mean())

    def test_zero_mode_limit(self):
        A = np.diag([2.0, 0.0])
        B = np.array([[1.0, 1.0]])
        t = np.array([0.0, 0.5, 3.0])
        res = ntk.solve_training_dynamics(A, B, [1.0, 1.0], eta=0.5, t_grid=t, y_test0=[0.2])
        ref_r, ref_y = _ode_reference(A, B, np.array([1.0, 1.0]), 0.5, 2, t)
        np.testing.assert_allclose(res.test_outputs[:, 0], 0.2 + ref_y[:, 0], atol=1e-9)
        np.testing.assert_allclose(res.residuals[:, 1], 1.0)

    @given(st.integers(2, 6), st.integers(0, 10 ** 6))
    @settings(max_examples=30, deadline=None)
    def test_residual_norm_non_increasing(self, n, seed):
        g = np.random.default_rng(seed)
        X = g.standard_normal((n, n))
        A = X @ X.T
        res = ntk.solve_training_dynamics(A, None, g.standard_normal(n), eta=0.1,
                                          t_grid=np.linspace(0, 20, 41))
        norms = res.residual_norms()
        assert np.all(np.diff(norms) <= 1e-12 * norms[0])

    def test_errors(self):
        with pytest.raises(DomainError):
            ntk.solve_training_dynamics(np.array([[1.0, 0.2], [0.0, 1.0]]), None, [1, 1], eta=0.1)
        with pytest.raises(DomainError):
            ntk.solve_training_dynamics(np.eye(2), None, [1, 1, 1], eta=0.1)
        with pytest.raises(DomainError):
            ntk.solve_training_dynamics(np.eye(2), None, [1, 1], eta=0.0)
