import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from criticalnets import activations as act
from criticalnets.errors import DomainError


SMOOTH = [act.tanh(), act.erf(), act.sin()]


def central(f, z, eps=1e-5):
    return (f(z + eps) - f(z - eps)) / (2 * eps)


class TestCatalogue:
    def test_members(self):
        names = [h.name for h in act.catalogue()]
        for n in ("tanh", "erf", "sin", "relu"):
            assert n in names
        assert any(h.scale_invariant and h.leak == 0.01 for h in act.catalogue())

    def test_lookup(self):
        assert act.get_activation("TANH").name == "tanh"
        assert act.get_activation("leaky-relu", 0.2).leak == 0.2
        with pytest.raises(DomainError):
            act.get_activation("gelu")

    def test_tanh_at_zero(self):
        h = act.tanh()
        assert h.d1(np.array(0.0)) == 1.0
        assert h.d2(np.array(0.0)) == 0.0

    def test_erf_derivative(self):
        z = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(act.erf().d1(z), 2 / np.sqrt(np.pi) * np.exp(-z * z), rtol=1e-15)

    def test_leaky_values(self):
        h = act.leaky_relu(0.01)
        assert h.h(np.array(-1.0)) == pytest.approx(-0.01)
        assert h.h(np.array(1.0)) == 1.0

    @pytest.mark.parametrize("h", SMOOTH, ids=lambda h: h.name)
    def test_smooth_class_origin(self, h):
        assert not h.scale_invariant
        assert h.h(np.array(0.0)) == 0.0
        d = float(h.d1(np.array(0.0)))
        assert math.isfinite(d) and d != 0.0


class TestDerivatives:
    @pytest.mark.parametrize("h", SMOOTH, ids=lambda h: h.name)
    def test_finite_differences(self, h, rng):
        z = rng.uniform(-3, 3, 20)
        for f, df in ((h.h, h.d1), (h.d1, h.d2), (h.d2, h.d3)):
            fd = central(f, z)
            ex = df(z)
            assert np.all(np.abs(fd - ex) <= 1e-6 * np.maximum(np.abs(ex), 1e-3))

    @pytest.mark.parametrize("h", SMOOTH + [act.relu(), act.leaky_relu(0.3)], ids=lambda h: h.name)
    def test_difference_is_cancellation_free(self, h, rng):
        z = rng.uniform(-2, 2, 50)
        dz = rng.uniform(-1, 1, 50) * 1e-9
        ref = h.d1(z) * dz
        np.testing.assert_allclose(h.diff(z, dz), ref, rtol=1e-7, atol=0)
        big = rng.uniform(-1, 1, 50)
        np.testing.assert_allclose(h.diff(z, big), h.h(z + big) - h.h(z), rtol=1e-12, atol=1e-15)


class TestScaleInvariant:
    @given(st.floats(0, 1), st.floats(0.01, 100), st.floats(-5, 5))
    @settings(max_examples=50, deadline=None)
    def test_homogeneous(self, a, lam, x):
        h = act.leaky_relu(a)
        assert h.h(np.array(lam * x)) == pytest.approx(lam * h.h(np.array(x)), rel=1e-12, abs=1e-300)

    def test_smooth_only_quantities_refused(self):
        with pytest.raises(Exception, match="distributional"):
            act.relu().require_smooth("kappa")

    def test_kernel_against_monte_carlo(self, rng):
        h = act.leaky_relu(0.2)
        rho = 0.6
        z1, z2 = rng.standard_normal((2, 400_000))
        c = 1 - rho
        u2 = c * z1 + np.sqrt(1 - c * c) * z2
        mc = np.mean(h.h(z1) * h.h(u2))
        assert h.si_kernel(rho) == pytest.approx(mc, abs=5e-3)
        mcd = np.mean(h.d1(z1) * h.d1(u2))
        assert h.si_deriv_kernel(rho) == pytest.approx(mcd, abs=5e-3)
        assert h.si_kernel(0.0) == pytest.approx((1 + 0.04) / 2, rel=1e-15)


class TestArccosStep:
    def test_fixed_point(self):
        assert act.arccos_kernel_rho_step(1.0, math.sqrt(2), 0.0) == 0.0

    def test_orthogonal_relu(self):
        assert act.arccos_kernel_rho_step(0.0, math.sqrt(2), 0.0) == pytest.approx(-1 / math.pi, rel=1e-15)

    @pytest.mark.parametrize("a", [0.0, 0.01, 0.3])
    def test_small_rho_power(self, a):
        sw = math.sqrt(2 / (1 + a * a))
        pref = 2 * math.sqrt(2) * (1 - a) ** 2 / (3 * (1 + a * a) * math.pi)
        for rho in (1e-3, 1e-4, 1e-6):
            step = act.arccos_kernel_rho_step(1 - rho, sw, a)
            assert step == pytest.approx(-pref * rho ** 1.5, rel=0.01)
            from_rho = act.arccos_kernel_rho_step_from_rho(rho, sw, a)
            assert from_rho == pytest.approx(-pref * rho ** 1.5, rel=0.01)

    @given(st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=60, deadline=None)
    def test_contracting(self, c, a):
        assert -act.arccos_kernel_rho_step(c, math.sqrt(2 / (1 + a * a)), a) >= 0

    def test_clamp_and_domain(self):
        assert act.arccos_kernel_rho_step(1 + 5e-13, 1.0, 0.0) == 0.0
        with pytest.raises(DomainError):
            act.arccos_kernel_rho_step(1.001, 1.0, 0.0)
