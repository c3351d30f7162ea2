import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from criticalnets.errors import DomainError
from criticalnets.quadrature import correlated_pair, expect1, expect2, gauss_hermite

from conftest import gaussian_quad


class TestRule:
    def test_weights_normalised(self):
        for order in (8, 64, 128, 256):
            rule = gauss_hermite(order)
            assert abs(rule.weights.sum() - 1.0) < 1e-12
            assert np.all(rule.weights > 0)

    def test_nodes_sorted_and_symmetric(self):
        rule = gauss_hermite()
        assert rule.order == 128
        assert np.all(np.diff(rule.nodes) > 0)
        np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])

    def test_bad_order(self):
        with pytest.raises(DomainError):
            gauss_hermite(0)


class TestExpect1:
    def test_normalisation(self):
        assert expect1(lambda z: np.ones_like(z)) == pytest.approx(1.0, abs=1e-15)

    def test_unit_variance(self):
        assert abs(expect1(lambda z: z ** 2) - 1.0) < 1e-12

    def test_tanh_squared_against_adaptive(self):
        ref = gaussian_quad(lambda z: np.tanh(z) ** 2)
        assert expect1(lambda z: np.tanh(z) ** 2) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("k", range(0, 17))
    def test_even_moments_exact(self, k):
        # E[z^(2k)] = (2k - 1)!!
        exact = float(np.prod(np.arange(2 * k - 1, 0, -2))) if k else 1.0
        assert expect1(lambda z: z ** (2 * k), gauss_hermite(32)) == pytest.approx(exact, rel=1e-12)

    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=20))
    @settings(max_examples=40, deadline=None)
    def test_polynomial_exactness(self, coeffs):
        # degree <= 19 < 2 * order - 1 for order 16
        poly = np.polynomial.Polynomial(coeffs)
        herm = poly.convert(kind=np.polynomial.HermiteE)
        exact = herm.coef[0]  # E[He_k(z)] = 0 for k > 0
        got = expect1(poly, gauss_hermite(16))
        scale = max(1.0, float(np.sum(np.abs(herm.coef))))
        assert abs(got - exact) <= 1e-12 * scale

    @pytest.mark.parametrize("name", ["tanh", "erf", "sin"])
    def test_order_doubling_stable(self, name, tanh_cp, erf_cp):
        from criticalnets.activations import get_activation
        from criticalnets.metric_factors import critical_point
        h = get_activation(name)
        cp = {"tanh": tanh_cp, "erf": erf_cp}.get(name) or critical_point(h, sigma_b=0.3)
        s = np.sqrt(cp.q_star)
        for f in (lambda z: h.h(s * z) ** 2, lambda z: h.d1(s * z) ** 2):
            a, b = expect1(f, gauss_hermite(128)), expect1(f, gauss_hermite(256))
            assert abs(a - b) <= 1e-12 * abs(b)
        f2 = lambda z: h.d2(s * z) ** 2
        a, b = expect1(f2, gauss_hermite(128)), expect1(f2, gauss_hermite(256))
        assert abs(a - b) <= 1e-10 * abs(b)

    def test_nonfinite_names_node(self):
        with pytest.raises(DomainError, match="node"), np.errstate(divide="ignore"):
            expect1(lambda z: 1.0 / (z - z[5]))


class TestExpect2:
    def test_normalisation(self):
        assert expect2(lambda a, b: 1.0 + 0 * a * b) == pytest.approx(1.0, abs=1e-15)

    def test_independence(self):
        assert abs(expect2(lambda a, b: a * b)) < 1e-12

    def test_correlated_tanh_against_nested_adaptive(self):
        s = np.sqrt(0.75)
        f = lambda a, b: np.tanh(a) * np.tanh(0.5 * a + s * b)
        g = lambda b, a: f(a, b) * np.exp(-0.5 * (a * a + b * b)) / (2 * np.pi)
        ref, _ = integrate.dblquad(g, -10, 10, -10, 10, epsabs=1e-13, epsrel=1e-11)
        assert expect2(f) == pytest.approx(ref, rel=1e-8)

    def test_nonfinite(self):
        with pytest.raises(DomainError), np.errstate(divide="ignore"):
            expect2(lambda a, b: np.log(a * 0 + b * 0))


class TestCorrelatedPair:
    def test_second_moments(self):
        rule = gauss_hermite(64)
        w = np.outer(rule.weights, rule.weights)
        q1, q2, rho = 1.3, 0.7, 0.4
        u1, du = correlated_pair(q1, q2, rho, rule)
        u2 = u1 + du
        assert np.sum(w * u1 * u1) == pytest.approx(q1, rel=1e-12)
        assert np.sum(w * u2 * u2) == pytest.approx(q2, rel=1e-12)
        assert np.sum(w * u1 * u2) == pytest.approx((1 - rho) * np.sqrt(q1 * q2), rel=1e-12)

    def test_identical_pair(self):
        _, du = correlated_pair(1.0, 1.0, 0.0)
        assert np.all(du == 0.0)

    def test_rho_out_of_range(self):
        with pytest.raises(DomainError):
            correlated_pair(1.0, 1.0, 2.5)
