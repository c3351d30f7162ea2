"""Nonuniversal metric factors at a point of the order/chaos boundary.

All K*=0 factors reduce to one-dimensional Gaussian expectations at the
critical variance q*_c:

    kappa   = q E[h''^2] / (2 E[h'^2])
    gamma_lr = (2/sigma_w) (1 - (q - sigma_b^2) E[z h' h''] / (sqrt(q) E[h h'']))
    gamma_ud = 2 sigma_b E[z h' h''] / (sqrt(q) E[h h''])
    zeta    = gamma_lr / kappa
    alpha   = 2 E[h^2] / (-sigma_w E[h h''])          (= dq*/dsigma_w)

where every h-derivative is evaluated at ``sqrt(q) z``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import meanfield as mf
from .activations import ActivationKernel
from .errors import DomainError, PreconditionError
from .quadrature import QuadratureRule, expect1, gauss_hermite, rule_for_variance


@dataclass(frozen=True)
class CriticalPoint:
    sigma_w: float
    sigma_b: float
    q_star: float
    kappa: float
    gamma_lr: float
    zeta: float
    alpha: float
    activation: ActivationKernel
    gamma_ud: Optional[float] = None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["activation"] = self.activation.name
        if self.activation.scale_invariant:
            d["leak"] = self.activation.leak
        return d


class _Moments:
    """The handful of 1-D expectations every closed form is built from."""

    def __init__(self, h: ActivationKernel, q: float, rule: QuadratureRule):
        h.require_smooth("the closed-form metric factors")
        s = math.sqrt(q)
        rule = rule_for_variance(q, rule)
        self.q = q
        self.h1sq = expect1(lambda z: h.d1(s * z) ** 2, rule)
        self.h2sq = expect1(lambda z: h.d2(s * z) ** 2, rule)
        self.hsq = expect1(lambda z: h.h(s * z) ** 2, rule)
        self.z_h1_h2 = expect1(lambda z: z * h.d1(s * z) * h.d2(s * z), rule)
        self.h_h2 = expect1(lambda z: h.h(s * z) * h.d2(s * z), rule)


def _moments(h, hp, q_star, rule):
    rule = rule or gauss_hermite()
    if q_star is None:
        q_star = mf.fixed_point_q(h, hp, rule=rule)
    return _Moments(h, q_star, rule)


def kappa(h: ActivationKernel, hp: mf.Hyperparameters, q_star: float | None = None,
          rule: QuadratureRule | None = None) -> float:
    """Critical decay rate: rho^(l) ~ 1/(kappa l) at the given critical point."""
    if h.scale_invariant:
        raise PreconditionError(f"{h.name} is scale-invariant; use kappa_scale_invariant(a)")
    m = _moments(h, hp, q_star, rule)
    return m.q * m.h2sq / (2.0 * m.h1sq)


def kappa_scale_invariant(a: float) -> float:
    """sqrt(2) (1 - a)^2 / (3 (1 + a^2) pi) for the leaky-ReLU family."""
    if a < 0:
        raise DomainError(f"leak must be non-negative, got {a}")
    return math.sqrt(2.0) * (1.0 - a) ** 2 / (3.0 * (1.0 + a * a) * math.pi)


def gamma_lr(h: ActivationKernel, hp: mf.Hyperparameters, q_star: float | None = None,
             rule: QuadratureRule | None = None) -> float:
    """Metric factor for crossing the boundary along sigma_w at fixed sigma_b."""
    m = _moments(h, hp, q_star, rule)
    ratio = (m.q - hp.sigma_b ** 2) * m.z_h1_h2 / (math.sqrt(m.q) * m.h_h2)
    return 2.0 / hp.sigma_w * (1.0 - ratio)


def gamma_ud(h: ActivationKernel, hp: mf.Hyperparameters, q_star: float | None = None,
             rule: QuadratureRule | None = None) -> float:
    """Metric factor for crossing along sigma_b at fixed sigma_w > 1/h'(0)."""
    h.require_smooth("gamma_ud")
    h1_0 = abs(float(h.d1(np.array(0.0))))
    if not hp.sigma_w * h1_0 > 1.0:
        raise PreconditionError(
            f"sigma_w = {hp.sigma_w} <= 1/h'(0): no sigma_b crossing exists")
    m = _moments(h, hp, q_star, rule)
    return 2.0 * hp.sigma_b * m.z_h1_h2 / (math.sqrt(m.q) * m.h_h2)


def zeta(h: ActivationKernel, hp: mf.Hyperparameters, q_star: float | None = None,
         rule: QuadratureRule | None = None) -> float:
    """Onset amplitude: rho* ~ zeta * (sigma_w - sigma_w;c) just above criticality."""
    m = _moments(h, hp, q_star, rule)
    g = gamma_lr(h, hp, m.q, rule)
    return g * 2.0 * m.h1sq / (m.q * m.h2sq)


def alpha(h: ActivationKernel, hp: mf.Hyperparameters, q_star: float | None = None,
          rule: QuadratureRule | None = None) -> float:
    """dq*/dsigma_w at a critical point."""
    m = _moments(h, hp, q_star, rule)
    denom = -hp.sigma_w * m.h_h2
    if denom == 0.0:
        raise PreconditionError("E[h h''] vanishes; alpha is undefined")
    return 2.0 * m.hsq / denom


def omega(sigma_w: float, sigma_b: float, q_star: float, n_in: int,
          input_sq_norm: float | None = None) -> float:
    """Ratio rho^(1) / rho^(0) set by the first layer.

    ``sigma_w^2 s / (sigma_w^2 s + n_in sigma_b^2)`` where ``s`` is the
    squared norm of each input.  With the default ``s = q*`` this is the
    conventional closed form in terms of the critical variance.
    """
    if n_in <= 0:
        raise DomainError("n_in must be positive")
    s = q_star if input_sq_norm is None else input_sq_norm
    a = sigma_w ** 2 * s
    return a / (a + n_in * sigma_b ** 2)


def critical_point(h: ActivationKernel, sigma_b: float | None = 0.3, sigma_w: float | None = None,
                   rule: QuadratureRule | None = None) -> CriticalPoint:
    """Locate a boundary point and evaluate every metric factor there.

    Give ``sigma_b`` to solve for sigma_w (the usual case) or give
    ``sigma_w`` with ``sigma_b=None`` to solve for sigma_b.
    Scale-invariant activations always return the sigma_b = 0 point.
    """
    rule = rule or gauss_hermite()
    if h.scale_invariant:
        sw = mf.critical_sigma_w(0.0, h)
        k = kappa_scale_invariant(h.leak)
        return CriticalPoint(sw, 0.0, 1.0, k, float("nan"), float("nan"), float("nan"), h, None)
    if sigma_b is None:
        if sigma_w is None:
            raise DomainError("give sigma_b or sigma_w")
        sigma_b = mf.critical_sigma_b(sigma_w, h, rule)
    else:
        sigma_w = mf.critical_sigma_w(sigma_b, h, rule=rule)
    hp = mf.Hyperparameters(sigma_w, sigma_b)
    q = mf.fixed_point_q(h, hp, rule=rule)
    k = kappa(h, hp, q, rule)
    g = gamma_lr(h, hp, q, rule)
    try:
        gud = gamma_ud(h, hp, q, rule)
    except PreconditionError:
        gud = None
    return CriticalPoint(sigma_w, sigma_b, q, k, g, zeta(h, hp, q, rule), alpha(h, hp, q, rule), h, gud)
