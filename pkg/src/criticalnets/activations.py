"""Activation functions and their Gaussian kernels.

Two classes are distinguished:

``"K*=0"``
    smooth odd-ish activations with ``h(0) = 0`` and ``h'(0) != 0``
    (tanh, erf, sin).  Derivatives up to third order are available and
    every Gaussian expectation goes through quadrature.

``"scale-invariant"``
    the leaky-ReLU family ``h(x) = x`` for ``x >= 0`` and ``a x`` otherwise.
    ``h''`` is a delta function, so the second and third derivatives are
    not provided; the pair expectations needed by the mean-field theory are
    the closed-form arc-cosine kernels below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from .errors import DomainError, PreconditionError

K0 = "K*=0"
SCALE_INVARIANT = "scale-invariant"

_TAYLOR_DELTA = 1e-4

Array = np.ndarray


@dataclass(frozen=True)
class ActivationKernel:
    name: str
    klass: str
    h: Callable[[Array], Array]
    d1: Callable[[Array], Array]
    d2: Optional[Callable[[Array], Array]] = None
    d3: Optional[Callable[[Array], Array]] = None
    leak: float = 0.0
    _diff: Optional[Callable[[Array, Array], Array]] = field(default=None, repr=False)

    @property
    def scale_invariant(self) -> bool:
        return self.klass == SCALE_INVARIANT

    def diff(self, z: Array, dz: Array) -> Array:
        """``h(z + dz) - h(z)`` without cancellation for small ``dz``."""
        if self._diff is not None:
            return self._diff(z, dz)
        z = np.asarray(z, dtype=float)
        dz = np.asarray(dz, dtype=float)
        small = np.abs(dz) < _TAYLOR_DELTA
        if self.d3 is None or not small.any():
            return self.h(z + dz) - self.h(z)
        z, dz = np.broadcast_arrays(z, dz)
        out = dz * (self.d1(z) + dz * (0.5 * self.d2(z) + dz * self.d3(z) / 6.0))
        big = ~small
        if big.any():
            out[big] = self.h(z[big] + dz[big]) - self.h(z[big])
        return out

    def require_smooth(self, what: str = "this quantity"):
        if self.scale_invariant:
            raise PreconditionError(
                f"{what} needs h'' which is distributional for {self.name}; "
                "use the scale-invariant closed forms instead")

    # closed-form Gaussian kernels, scale-invariant class only

    def si_kernel(self, rho: float) -> float:
        """E[h(u1) h(u2)] / sqrt(q1 q2) at correlation c = 1 - rho."""
        a = self.leak
        theta = arccos_from_rho(rho)
        return (1.0 - rho) * (1.0 + a * a) / 2.0 + (1.0 - a) ** 2 * _sin_minus_theta_cos(theta) / (2.0 * math.pi)

    def si_kernel_gap(self, rho: float) -> float:
        """(E[h(u)^2] - E[h(u1) h(u2)]) / q for equal variances; accurate as rho -> 0."""
        a = self.leak
        theta = arccos_from_rho(rho)
        return rho * (1.0 + a * a) / 2.0 - (1.0 - a) ** 2 * _sin_minus_theta_cos(theta) / (2.0 * math.pi)

    def si_deriv_kernel(self, rho: float) -> float:
        """E[h'(u1) h'(u2)] at correlation c = 1 - rho (independent of the variances)."""
        a = self.leak
        theta = arccos_from_rho(rho)
        return (1.0 + a * a) / 2.0 - (1.0 - a) ** 2 * theta / (2.0 * math.pi)


def arccos_from_rho(rho: float) -> float:
    """arccos(1 - rho) computed as 2 arcsin(sqrt(rho / 2))."""
    if rho < 0.0:
        rho = 0.0
    if rho > 2.0:
        rho = 2.0
    return 2.0 * math.asin(math.sqrt(rho / 2.0))


def _sin_minus_theta_cos(theta: float) -> float:
    # sin(t) - t cos(t); the series avoids the t^3 cancellation near 0
    if theta < 0.1:
        t2 = theta * theta
        # sum_k (-1)^(k+1) 2k t^(2k+1) / (2k+1)!
        return theta * t2 * (1.0 / 3.0 - t2 * (1.0 / 30.0 - t2 * (1.0 / 840.0 - t2 / 45360.0)))
    return math.sin(theta) - theta * math.cos(theta)


def arccos_kernel_rho_step(c: float, sigma_w: float, a: float) -> float:
    """One-layer increment rho' - rho of the leaky-ReLU C-map on the critical line.

    Returns ``-(sigma_w^2 (1 - a)^2 / 2 pi) (sqrt(1 - c^2) - c arccos c)``.
    Values of ``c`` within 1e-12 of +-1 are clamped.
    """
    if abs(c) > 1.0 + 1e-12:
        raise DomainError(f"correlation must lie in [-1, 1], got {c}")
    c = min(1.0, max(-1.0, c))
    return -(sigma_w ** 2) * (1.0 - a) ** 2 / (2.0 * math.pi) * _sin_minus_theta_cos(math.acos(c))


def arccos_kernel_rho_step_from_rho(rho: float, sigma_w: float, a: float) -> float:
    """Same increment as :func:`arccos_kernel_rho_step`, parameterised by rho = 1 - c."""
    if not -1e-12 <= rho <= 2.0 + 1e-12:
        raise DomainError(f"rho must lie in [0, 2], got {rho}")
    theta = arccos_from_rho(rho)
    return -(sigma_w ** 2) * (1.0 - a) ** 2 / (2.0 * math.pi) * _sin_minus_theta_cos(theta)


# ---------------------------------------------------------------- catalogue

def _tanh_diff(z, dz):
    # tanh(z + dz) - tanh(z) = tanh(dz) (1 - tanh(z + dz) tanh(z)); no overflow, no cancellation in dz
    z = np.asarray(z, dtype=float)
    dz = np.asarray(dz, dtype=float)
    return np.tanh(dz) * (1.0 - np.tanh(z + dz) * np.tanh(z))


def _sech2(z):
    c = np.cosh(z)
    return 1.0 / (c * c)


def tanh() -> ActivationKernel:
    def d2(z):
        return -2.0 * np.tanh(z) * _sech2(z)

    def d3(z):
        t = np.tanh(z)
        return _sech2(z) * (6.0 * t * t - 2.0)

    return ActivationKernel("tanh", K0, np.tanh, _sech2, d2, d3, _diff=_tanh_diff)


_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def erf() -> ActivationKernel:
    def d1(z):
        return _TWO_OVER_SQRT_PI * np.exp(-z * z)

    def d2(z):
        return -2.0 * z * d1(z)

    def d3(z):
        return (4.0 * z * z - 2.0) * d1(z)

    def diff(z, dz):
        z = np.asarray(z, dtype=float)
        dz = np.asarray(dz, dtype=float)
        small = np.abs(dz) < _TAYLOR_DELTA
        if not np.any(small):
            return special.erf(z + dz) - special.erf(z)
        # third-order Taylor with the Gaussian factor shared by all terms
        z, dz = np.broadcast_arrays(z, dz)
        out = dz * d1(z) * (1.0 - z * dz + (2.0 * z * z - 1.0) * dz * dz / 3.0)
        big = ~small
        if big.any():
            out[big] = special.erf(z[big] + dz[big]) - special.erf(z[big])
        return out

    return ActivationKernel("erf", K0, special.erf, d1, d2, d3, _diff=diff)


def sin() -> ActivationKernel:
    def d2(z):
        return -np.sin(z)

    def d3(z):
        return -np.cos(z)

    def diff(z, dz):
        return 2.0 * np.cos(z + 0.5 * dz) * np.sin(0.5 * dz)

    return ActivationKernel("sin", K0, np.sin, np.cos, d2, d3, _diff=diff)


def leaky_relu(a: float = 0.0) -> ActivationKernel:
    """Scale-invariant ``h(x) = x`` (x >= 0), ``a x`` (x < 0); ``a = 0`` is ReLU."""
    if a < 0:
        raise DomainError(f"leak must be non-negative, got {a}")
    a = float(a)

    def h(z):
        return np.where(z >= 0, z, a * z)

    def d1(z):
        return np.where(z >= 0, 1.0, a)

    def diff(z, dz):
        w = z + dz
        same_pos = (z >= 0) & (w >= 0)
        same_neg = (z < 0) & (w < 0)
        return np.where(same_pos, dz, np.where(same_neg, a * dz, h(w) - h(z)))

    if a == 0.0:
        name = "relu"
    elif a == 1.0:
        name = "linear"
    else:
        name = f"leaky_relu({a:g})"
    return ActivationKernel(name, SCALE_INVARIANT, h, d1, leak=a, _diff=diff)


def relu() -> ActivationKernel:
    return leaky_relu(0.0)


def linear() -> ActivationKernel:
    return leaky_relu(1.0)


_BUILDERS = {
    "tanh": tanh,
    "erf": erf,
    "sin": sin,
    "relu": relu,
    "linear": linear,
}


def catalogue(leaks=(0.0, 0.01)) -> list[ActivationKernel]:
    """The K*=0 members plus the leaky-ReLU family at the given leaks."""
    return [tanh(), erf(), sin()] + [leaky_relu(a) for a in leaks]


def get_activation(name: str, leak: float | None = None) -> ActivationKernel:
    """Look an activation up by name; ``leaky_relu`` (alias ``lrelu``) takes ``leak``."""
    key = name.strip().lower().replace("-", "_")
    if key in ("leaky_relu", "lrelu", "leakyrelu"):
        return leaky_relu(0.0 if leak is None else leak)
    if key == "relu" and leak:
        return leaky_relu(leak)
    try:
        return _BUILDERS[key]()
    except KeyError:
        known = ", ".join(sorted(_BUILDERS) + ["leaky_relu"])
        raise DomainError(f"unknown activation {name!r}; known: {known}") from None
