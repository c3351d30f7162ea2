import math

import numpy as np
import pytest
from scipy import optimize

from criticalnets import activations as act
from criticalnets import meanfield as mf
from criticalnets.errors import DivergenceError, DomainError, PreconditionError

from conftest import gaussian_quad, hp

TANH_C = 1.39558
ERF_C = 1.23367


def unit_pair(n_in=10):
    x1 = np.zeros(n_in)
    x2 = np.zeros(n_in)
    x1[0] = x2[1] = 1.0
    return x1, x2


class TestHyperparameters:
    def test_validation(self):
        with pytest.raises(DomainError):
            mf.Hyperparameters(0.0, 0.3)
        with pytest.raises(DomainError):
            mf.Hyperparameters(1.0, -0.1)


class TestInitState:
    def test_identical_inputs(self, rng):
        x = rng.standard_normal(7)
        s = mf.init_state(x, x, hp(1.3))
        assert s.rho == 0.0 and s.c == 1.0

    def test_orthogonal_no_bias(self):
        s = mf.init_state(*unit_pair(), hp(1.3, 0.0))
        assert s.C == 0.0 and s.c == 0.0

    def test_orthogonal_with_bias(self):
        sw, sb = 1.39558, 0.3
        s = mf.init_state(*unit_pair(10), hp(sw, sb))
        q = sw * sw / 10 + sb * sb
        assert s.q1 == pytest.approx(q, rel=1e-15)
        assert s.C == pytest.approx(sb * sb, rel=1e-15)
        assert s.c == pytest.approx(sb * sb / q, rel=1e-14)

    def test_errors(self):
        with pytest.raises(DomainError):
            mf.init_state([], [], hp(1.0))
        with pytest.raises(DomainError):
            mf.init_state([1.0], [1.0, 2.0], hp(1.0))

    def test_tiny_distance_keeps_precision(self):
        eps = 1e-100
        x1 = np.array([1.0, 0.0])
        x2 = np.array([1.0, eps])
        s = mf.init_state(x1, x2, hp(1.0, 0.0))
        assert s.rho == pytest.approx(eps * eps / 2, rel=1e-12)


class TestStep:
    def test_identical_pair_is_absorbing(self):
        for h in (act.tanh(), act.erf(), act.relu()):
            tr = mf.meanfield_trace([1.0, 0.5], [1.0, 0.5], h, hp(1.4, 0.3 if not h.scale_invariant else 0.0), 50)
            assert np.all(tr.rho == 0.0)

    def test_ordered_phase_decays(self):
        tr = mf.meanfield_trace(*unit_pair(), act.tanh(), hp(1.35), 2000)
        assert tr.rho[-1] < 1e-10 * tr.rho[0]

    def test_chaotic_phase_saturates(self):
        tr = mf.meanfield_trace(*unit_pair(), act.tanh(), hp(1.45), 3000)
        assert tr.rho[-1] > 1e-3
        assert abs(tr.rho[-1] - tr.rho[-500]) < 1e-10

    def test_layers_start_at_one(self):
        tr = mf.meanfield_trace(*unit_pair(), act.tanh(), hp(1.4), 5)
        np.testing.assert_array_equal(tr.layers, [1, 2, 3, 4, 5])
        assert [s.layer for s in tr.states] == [1, 2, 3, 4, 5]

    def test_step_matches_direct_quadrature(self):
        h = act.tanh()
        s0 = mf.init_state([1.0, 0.2], [0.3, 1.1], hp(1.4))
        s1 = mf.step(s0, h, hp(1.4))
        a1, a2 = math.sqrt(s0.q1), math.sqrt(s0.q2)
        c = s0.c
        from criticalnets.quadrature import expect1, expect2, gauss_hermite
        fine = gauss_hermite(512)
        C = 1.4 ** 2 * expect2(lambda z1, z2: np.tanh(a1 * z1) * np.tanh(a2 * (c * z1 + math.sqrt(1 - c * c) * z2)),
                               fine) + 0.09
        q1 = 1.4 ** 2 * expect1(lambda z: np.tanh(a1 * z) ** 2, fine) + 0.09
        assert s1.C == pytest.approx(C, rel=1e-12)
        assert s1.q1 == pytest.approx(q1, rel=1e-12)
        assert s1.layer == 2

    def test_relu_variance_constant(self):
        x1, x2 = unit_pair(10)
        tr = mf.meanfield_trace(x1, x2, act.relu(), hp(math.sqrt(2), 0.0), 100)
        np.testing.assert_allclose(tr.q1, tr.q1[0], rtol=1e-13)

    def test_scale_invariant_supercritical_diverges(self):
        with pytest.raises(DivergenceError):
            mf.meanfield_trace(*unit_pair(), act.relu(), hp(1.6, 0.0), 5000)


class TestFixedPointQ:
    def test_vanishes_without_bias(self):
        assert mf.fixed_point_q(act.tanh(), hp(0.9, 0.0)) == 0.0

    def test_relu_on_critical_line(self):
        assert mf.fixed_point_q(act.relu(), hp(math.sqrt(2), 0.0), q0=0.7) == 0.7

    def test_against_root_of_fixed_point_equation(self):
        sw, sb = 1.39558, 0.3

        def g(q):
            return q - sw * sw * gaussian_quad(lambda z: np.tanh(math.sqrt(q) * z) ** 2) - sb * sb

        ref = optimize.brentq(g, 0.1, 2.0, xtol=1e-15, rtol=1e-15)
        assert mf.fixed_point_q(act.tanh(), hp(sw, sb)) == pytest.approx(ref, rel=1e-12)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            mf.fixed_point_q(act.relu(), hp(1.5, 0.1))


class TestCMap:
    @pytest.mark.parametrize("h", [act.tanh(), act.erf(), act.sin(), act.relu()], ids=lambda h: h.name)
    @pytest.mark.parametrize("sw", [0.8, 1.3, 2.0])
    def test_c_one_is_fixed(self, h, sw):
        if h.scale_invariant:
            p, q = hp(math.sqrt(2), 0.0), 0.8
        else:
            p = hp(sw, 0.3)
            q = mf.fixed_point_q(h, p)
        assert abs(mf.cmap_step(1.0, q, h, p) - 1.0) < 1e-12

    def test_marginal_at_criticality(self, tanh_cp):
        h = act.tanh()
        p = hp(tanh_cp.sigma_w)
        r = 1e-6
        slope = mf.cmap_step_rho(r, tanh_cp.q_star, h, p) / r
        assert slope == pytest.approx(1.0, abs=1e-6)

    def test_chaotic_fixed_point_matches_iteration(self):
        h = act.tanh()
        p = hp(1.45)
        tr = mf.meanfield_trace(*unit_pair(), h, p, 4000)
        assert mf.fixed_point_rho(h, p) == pytest.approx(tr.rho[-1], abs=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            mf.cmap_step(1.5, 1.0, act.tanh(), hp(1.4))


class TestCorrelationDepth:
    def test_zero_at_criticality(self, tanh_cp):
        assert abs(mf.correlation_depth(act.tanh(), hp(tanh_cp.sigma_w))) < 1e-8

    def test_matches_trace_regression(self):
        h = act.tanh()
        p = hp(1.35)
        inv = mf.correlation_depth(h, p)
        assert inv > 0
        tr = mf.meanfield_trace(*unit_pair(), h, p, 10_000)
        sel = (tr.rho < 1e-60) & (tr.rho > 1e-280)
        slope = np.polyfit(tr.layers[sel], np.log(tr.rho[sel]), 1)[0]
        assert -slope == pytest.approx(inv, abs=1e-4)

    def test_slope_is_gamma(self, tanh_cp):
        h = act.tanh()
        d = 1e-5
        for sign in (-1, 1):
            inv = mf.correlation_depth(h, hp(tanh_cp.sigma_w + sign * d))
            assert (1 - math.exp(-inv)) / d == pytest.approx(tanh_cp.gamma_lr, rel=1e-3)


class TestLyapunov:
    def test_signs(self, tanh_cp):
        h = act.tanh()
        assert abs(mf.lyapunov_cmap(h, hp(tanh_cp.sigma_w))) < 1e-8
        assert mf.lyapunov_cmap(h, hp(1.45)) > 0
        assert mf.lyapunov_cmap(h, hp(1.35)) < 0

    def test_monotone_in_sigma_w(self):
        lam = [mf.lyapunov_cmap(act.tanh(), hp(sw)) for sw in np.linspace(1.0, 2.0, 100)]
        assert np.all(np.diff(lam) > 0)


class TestCriticalLine:
    def test_tanh(self):
        assert mf.critical_sigma_w(0.3, act.tanh()) == pytest.approx(TANH_C, abs=1e-4)

    def test_erf(self):
        assert mf.critical_sigma_w(0.3, act.erf()) == pytest.approx(ERF_C, abs=1e-4)

    def test_relu(self):
        assert mf.critical_sigma_w(0.3, act.relu()) == math.sqrt(2)
        assert mf.critical_sigma_w(0.0, act.leaky_relu(0.5)) == math.sqrt(2 / 1.25)

    def test_sigma_b_inverse(self):
        assert mf.critical_sigma_b(TANH_C, act.tanh()) == pytest.approx(0.3, abs=1e-4)
        assert mf.critical_sigma_b(ERF_C, act.erf()) == pytest.approx(0.3, abs=1e-4)
        sw = mf.critical_sigma_w(0.2, act.sin())
        assert mf.critical_sigma_b(sw, act.sin()) == pytest.approx(0.2, abs=1e-10)

    def test_sigma_b_precondition(self):
        with pytest.raises(PreconditionError, match="never crosses"):
            mf.critical_sigma_b(1.0, act.tanh())

    def test_no_bracket(self):
        with pytest.raises(PreconditionError):
            mf.critical_sigma_w(0.3, act.tanh(), bracket=(1.5, 3.0))

    def test_phase_of(self):
        h = act.tanh()
        assert mf.phase_of(hp(1.35), h) == "ordered"
        assert mf.phase_of(hp(1.45), h) == "chaotic"
        assert mf.phase_of(hp(1.39558), h, tol=1e-4) == "critical"

    def test_phase_diagram_layout(self):
        lam = mf.phase_diagram(act.tanh(), [1.2, 1.6], [0.1, 0.3, 0.5])
        assert lam.shape == (3, 2)
        assert np.all(lam[:, 0] < lam[:, 1])


class TestOnset:
    def test_exponents_and_amplitude(self, tanh_cp):
        h = act.tanh()
        d = np.logspace(-4, -2, 7)
        rho_star = np.array([mf.fixed_point_rho(h, hp(tanh_cp.sigma_w + x)) for x in d])
        inv_above = np.array([mf.correlation_depth(h, hp(tanh_cp.sigma_w + x)) for x in d])
        inv_below = np.array([mf.correlation_depth(h, hp(tanh_cp.sigma_w - x)) for x in d])
        for y in (rho_star, inv_above, inv_below):
            slope = np.polyfit(np.log(d), np.log(y), 1)[0]
            assert slope == pytest.approx(1.0, abs=0.05)
        assert rho_star[0] == pytest.approx(tanh_cp.zeta * d[0], rel=0.02)
