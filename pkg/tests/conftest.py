import numpy as np
import pytest

from criticalnets import activations as act
from criticalnets import meanfield as mf
from criticalnets.metric_factors import critical_point


@pytest.fixture(scope="session")
def tanh_cp():
    return critical_point(act.tanh(), sigma_b=0.3)


@pytest.fixture(scope="session")
def erf_cp():
    return critical_point(act.erf(), sigma_b=0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian_quad(f, lim=12.0):
    """Adaptive oracle for E[f(z)], z ~ N(0, 1)."""
    from scipy import integrate
    val, _ = integrate.quad(lambda z: f(z) * np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi),
                            -lim, lim, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def hp(sw, sb=0.3):
    return mf.Hyperparameters(sw, sb)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and assert it."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
