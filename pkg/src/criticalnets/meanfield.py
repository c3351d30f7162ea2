"""Infinite-width signal propagation: variance/covariance recursions and the C-map.

The covariance recursion is carried in terms of ``rho = 1 - c`` rather than
``c``.  The one-layer update is written as

    rho' = [sigma_w^2 E[(h(u1) - h(u2))^2] / 2 - (sqrt(q1') - sqrt(q2'))^2 / 2] / sqrt(q1' q2')

with ``h(u2) - h(u1)`` evaluated by :meth:`ActivationKernel.diff`, so a
pair that is 1e-200 apart is still propagated with full relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .activations import ActivationKernel
from .errors import ConvergenceError, DivergenceError, DomainError, PreconditionError
from .quadrature import QuadratureRule, correlated_pair, expect1, gauss_hermite, rule_for_variance

FIXED_POINT_TOL = 1e-14
FIXED_POINT_MAX_ITER = 100_000
Q_CEILING = 1e12
SIGMA_W_BRACKET = (0.1, 5.0)


@dataclass(frozen=True)
class Hyperparameters:
    sigma_w: float
    sigma_b: float = 0.0

    def __post_init__(self):
        if not self.sigma_w > 0:
            raise DomainError(f"sigma_w must be positive, got {self.sigma_w}")
        if not self.sigma_b >= 0:
            raise DomainError(f"sigma_b must be non-negative, got {self.sigma_b}")


@dataclass(frozen=True)
class MeanFieldState:
    q1: float
    q2: float
    C: float
    rho: float
    layer: int = 1

    @property
    def c(self) -> float:
        return 1.0 - self.rho


@dataclass
class MeanFieldTrace:
    """Layer-by-layer mean-field quantities, layers numbered from 1.

    ``cdot[l-1]`` is ``sigma_w^2 E[h'(u1) h'(u2)]`` evaluated with the
    statistics of layer ``l`` (only filled when requested).
    """

    q1: np.ndarray
    q2: np.ndarray
    C: np.ndarray
    rho: np.ndarray
    cdot: Optional[np.ndarray] = None
    activation: str = ""
    hp: Optional[Hyperparameters] = None

    @property
    def layers(self) -> np.ndarray:
        return np.arange(1, len(self.rho) + 1)

    @property
    def c(self) -> np.ndarray:
        return 1.0 - self.rho

    @property
    def states(self) -> list[MeanFieldState]:
        return [MeanFieldState(float(a), float(b), float(cc), float(r), l)
                for l, (a, b, cc, r) in enumerate(zip(self.q1, self.q2, self.C, self.rho), start=1)]

    def __len__(self):
        return len(self.rho)


# ----------------------------------------------------------------- helpers

def _as_input(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("input vectors must be non-empty")
    return x


def init_state(x1, x2, hp: Hyperparameters) -> MeanFieldState:
    """Layer-1 statistics of two inputs (first-layer preactivations)."""
    x1, x2 = _as_input(x1), _as_input(x2)
    if x1.size != x2.size:
        raise DomainError(f"inputs differ in length: {x1.size} vs {x2.size}")
    n_in = x1.size
    sw2, sb2 = hp.sigma_w ** 2, hp.sigma_b ** 2
    q1 = sw2 * float(x1 @ x1) / n_in + sb2
    q2 = sw2 * float(x2 @ x2) / n_in + sb2
    C = sw2 * float(x1 @ x2) / n_in + sb2
    d = x2 - x1
    # (q1 + q2)/2 - C = sw2 |x1 - x2|^2 / (2 n_in) -- exact for identical inputs
    gap = sw2 * float(d @ d) / (2.0 * n_in)
    rho = _rho_from_gap(gap, q1, q2)
    return MeanFieldState(q1, q2, C, rho, 1)


def _rho_from_gap(gap: float, q1: float, q2: float) -> float:
    """1 - C/sqrt(q1 q2) given gap = (q1 + q2)/2 - C."""
    if q1 <= 0.0 or q2 <= 0.0:
        return 0.0
    s = math.sqrt(q1 * q2)
    rho = (gap - 0.5 * (math.sqrt(q1) - math.sqrt(q2)) ** 2) / s
    return min(2.0, max(0.0, rho))


def _q_map(q: float, h: ActivationKernel, hp: Hyperparameters, rule: QuadratureRule) -> float:
    sw2, sb2 = hp.sigma_w ** 2, hp.sigma_b ** 2
    if h.scale_invariant:
        return sw2 * q * (1.0 + h.leak ** 2) / 2.0 + sb2
    s = math.sqrt(q)
    return sw2 * expect1(lambda z: h.h(s * z) ** 2, rule_for_variance(q, rule)) + sb2


# product-grid nodes with weight below this carry < 1e-28 total mass and are skipped
_PAIR_WEIGHT_FLOOR = 1e-30


class _PairGrid:
    """Evaluates the pair expectations for one layer on the product grid."""

    def __init__(self, rule: QuadratureRule):
        self.rule = rule
        self._W = {}
        self._key = None
        self._hu1 = None
        self._d1u1 = None

    def _weights(self, rule):
        got = self._W.get(rule.order)
        if got is None:
            W = np.outer(rule.weights, rule.weights)
            keep = W > _PAIR_WEIGHT_FLOOR
            got = self._W[rule.order] = (keep, W[keep])
        return got

    def moments(self, q1, q2, rho, h: ActivationKernel, want_deriv=False):
        """Return (E[h(u1)h(u2)], E[(h(u1)-h(u2))^2]/2, E[h'(u1)h'(u2)] or None)."""
        rule = rule_for_variance(max(q1, q2), self.rule)
        keep, w = self._weights(rule)
        u1, du = correlated_pair(q1, q2, rho, rule)
        u1, du = u1[keep], du[keep]
        if self._key != (q1, rule.order):
            self._key = (q1, rule.order)
            self._hu1 = h.h(u1)
            self._d1u1 = h.d1(u1)
        hu1 = self._hu1
        dh = h.diff(u1, du)
        cross = float(w @ (hu1 * (hu1 + dh)))
        half_sq = 0.5 * float(w @ (dh * dh))
        deriv = None
        if want_deriv:
            deriv = float(w @ (self._d1u1 * h.d1(u1 + du)))
        return cross, half_sq, deriv


def _next_state(state: MeanFieldState, h, hp, rule, grid: Optional[_PairGrid], want_deriv):
    sw2, sb2 = hp.sigma_w ** 2, hp.sigma_b ** 2
    q1n = _q_map(state.q1, h, hp, rule)
    q2n = q1n if state.q2 == state.q1 else _q_map(state.q2, h, hp, rule)
    if h.scale_invariant:
        a2 = (1.0 + h.leak ** 2) / 2.0
        sq = math.sqrt(state.q1 * state.q2)
        gap = sw2 * (0.5 * a2 * (math.sqrt(state.q1) - math.sqrt(state.q2)) ** 2 + sq * h.si_kernel_gap(state.rho))
        C = sw2 * sq * h.si_kernel(state.rho) + sb2
        deriv = h.si_deriv_kernel(state.rho) if want_deriv else None
    else:
        grid = grid or _PairGrid(rule)
        cross, half_sq, deriv = grid.moments(state.q1, state.q2, state.rho, h, want_deriv)
        gap = sw2 * half_sq
        C = sw2 * cross + sb2
    rho = _rho_from_gap(gap, q1n, q2n)
    cdot = sw2 * deriv if want_deriv else None
    return MeanFieldState(q1n, q2n, C, rho, state.layer + 1), cdot


def step(state: MeanFieldState, h: ActivationKernel, hp: Hyperparameters,
         rule: QuadratureRule | None = None) -> MeanFieldState:
    """Apply one layer of the variance/covariance recursion."""
    rule = rule or gauss_hermite()
    return _next_state(state, h, hp, rule, None, False)[0]


def deriv_covariance(state: MeanFieldState, h: ActivationKernel, hp: Hyperparameters,
                     rule: QuadratureRule | None = None) -> float:
    """sigma_w^2 E[h'(u1) h'(u2)] at the statistics of ``state``."""
    rule = rule or gauss_hermite()
    return _next_state(state, h, hp, rule, None, True)[1]


def iterate(state: MeanFieldState, h: ActivationKernel, hp: Hyperparameters, n_layers: int,
            rule: QuadratureRule | None = None, with_deriv: bool = False) -> MeanFieldTrace:
    """Run the recursion from ``state`` for a total of ``n_layers`` layers (state included)."""
    if n_layers < 1:
        raise DomainError("n_layers must be >= 1")
    rule = rule or gauss_hermite()
    grid = None if h.scale_invariant else _PairGrid(rule)
    q1 = np.empty(n_layers)
    q2 = np.empty(n_layers)
    C = np.empty(n_layers)
    rho = np.empty(n_layers)
    cdot = np.empty(n_layers) if with_deriv else None
    s = state
    for i in range(n_layers):
        q1[i], q2[i], C[i], rho[i] = s.q1, s.q2, s.C, s.rho
        if i == n_layers - 1 and not with_deriv:
            break
        nxt, d = _next_state(s, h, hp, rule, grid, with_deriv)
        if with_deriv:
            cdot[i] = d
        if not (math.isfinite(nxt.q1) and math.isfinite(nxt.q2)) or max(nxt.q1, nxt.q2) > Q_CEILING:
            raise DivergenceError(f"variance diverged at layer {nxt.layer}", last=(s.q1, nxt.q1))
        s = nxt
    return MeanFieldTrace(q1, q2, C, rho, cdot, h.name, hp)


def meanfield_trace(x1, x2, h: ActivationKernel, hp: Hyperparameters, n_layers: int,
                    rule: QuadratureRule | None = None, with_deriv: bool = False) -> MeanFieldTrace:
    """Mean-field trace for a pair of inputs, layers 1..n_layers."""
    return iterate(init_state(x1, x2, hp), h, hp, n_layers, rule, with_deriv)


# ----------------------------------------------------------- fixed points

def fixed_point_q(h: ActivationKernel, hp: Hyperparameters, tol: float = FIXED_POINT_TOL,
                  max_iter: int = FIXED_POINT_MAX_ITER, q0: float = 1.0,
                  ceiling: float = Q_CEILING, rule: QuadratureRule | None = None) -> float:
    """Fixed point q* of the variance map, iterated from ``q0``.

    Scale-invariant activations are linear in q, so the answer is written
    down directly: ``q*`` is finite below the critical line, equals ``q0``
    on the critical line with ``sigma_b = 0``, and diverges otherwise.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    rule = rule or gauss_hermite()
    sw2, sb2 = hp.sigma_w ** 2, hp.sigma_b ** 2
    if h.scale_invariant:
        slope = sw2 * (1.0 + h.leak ** 2) / 2.0
        if slope < 1.0 - 1e-12:
            return sb2 / (1.0 - slope)
        if abs(slope - 1.0) < 1e-12 and sb2 == 0.0:
            return float(q0)
        raise DivergenceError(
            f"q diverges for {h.name} at sigma_w={hp.sigma_w}, sigma_b={hp.sigma_b} "
            f"(per-layer gain {slope:.6g})", last=(q0, slope * q0 + sb2))
    if sb2 == 0.0 and hp.sigma_w * abs(float(h.d1(np.array(0.0)))) <= 1.0:
        # |h(x)| <= |h'(0) x| for the K*=0 members, so q contracts to 0
        return 0.0
    q = float(q0)
    for _ in range(int(max_iter)):
        qn = _q_map(q, h, hp, rule)
        if not math.isfinite(qn) or qn > ceiling:
            raise DivergenceError(f"q exceeded ceiling {ceiling:g}", last=(q, qn))
        if abs(qn - q) < tol:
            return qn
        q = qn
    raise ConvergenceError(f"q did not converge in {max_iter} iterations", last=(q, qn))


def chi(h: ActivationKernel, hp: Hyperparameters, q_star: float | None = None,
        rule: QuadratureRule | None = None) -> float:
    """sigma_w^2 E[h'(sqrt(q*) z)^2], the slope of the C-map at c = 1."""
    rule = rule or gauss_hermite()
    if h.scale_invariant:
        return hp.sigma_w ** 2 * (1.0 + h.leak ** 2) / 2.0
    if q_star is None:
        q_star = fixed_point_q(h, hp, rule=rule)
    s = math.sqrt(q_star)
    return hp.sigma_w ** 2 * expect1(lambda z: h.d1(s * z) ** 2, rule_for_variance(q_star, rule))


def lyapunov_cmap(h: ActivationKernel, hp: Hyperparameters, rule: QuadratureRule | None = None) -> float:
    """Lyapunov exponent of the trivial fixed point c = 1 of the C-map."""
    return math.log(chi(h, hp, rule=rule))


def cmap_step(c: float, q_star: float, h: ActivationKernel, hp: Hyperparameters,
              rule: QuadratureRule | None = None) -> float:
    """One application of the iterative C-map at fixed variance q*."""
    if abs(c) > 1.0 + 1e-12:
        raise DomainError(f"c must lie in [-1, 1], got {c}")
    rho = 1.0 - min(1.0, max(-1.0, c))
    return 1.0 - cmap_step_rho(rho, q_star, h, hp, rule)


def cmap_step_rho(rho: float, q_star: float, h: ActivationKernel, hp: Hyperparameters,
                  rule: QuadratureRule | None = None) -> float:
    """The C-map written for rho = 1 - c; accurate for rho down to the underflow limit."""
    if q_star <= 0:
        raise DomainError("q* must be positive")
    rule = rule or gauss_hermite()
    sw2, sb2 = hp.sigma_w ** 2, hp.sigma_b ** 2
    if h.scale_invariant:
        q_next = sw2 * q_star * (1.0 + h.leak ** 2) / 2.0 + sb2
        return 1.0 - q_next / q_star + sw2 * h.si_kernel_gap(rho)
    # q* is taken as an exact fixed point; its 1e-15 residual would otherwise bias rho
    _, half_sq, _ = _PairGrid(rule).moments(q_star, q_star, rho, h)
    return sw2 * half_sq / q_star


def _cmap_deriv_kernel(rho: float, q_star: float, h, hp, rule) -> float:
    """sigma_w^2 E[h'(u1*) h'(u2*)] at correlation 1 - rho."""
    if h.scale_invariant:
        return hp.sigma_w ** 2 * h.si_deriv_kernel(rho)
    _, _, d = _PairGrid(rule).moments(q_star, q_star, rho, h, want_deriv=True)
    return hp.sigma_w ** 2 * d


def fixed_point_rho(h: ActivationKernel, hp: Hyperparameters, q_star: float | None = None,
                    rule: QuadratureRule | None = None) -> float:
    """Stationary order parameter rho* = 1 - c* of the C-map.

    Zero in the ordered phase; in the chaotic phase the non-trivial root
    is bracketed on a logarithmic grid and polished with Brent's method.
    """
    rule = rule or gauss_hermite()
    if q_star is None:
        q_star = fixed_point_q(h, hp, rule=rule)
    if q_star == 0.0 or chi(h, hp, q_star, rule) <= 1.0:
        return 0.0

    def g(r):
        return cmap_step_rho(r, q_star, h, hp, rule) - r

    grid = np.logspace(-14, math.log10(2.0), 200)
    prev = grid[0]
    if g(prev) <= 0:
        return 0.0
    for r in grid[1:]:
        if g(r) <= 0:
            return optimize.brentq(g, prev, r, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        prev = r
    return float(grid[-1])


def correlation_depth(h: ActivationKernel, hp: Hyperparameters, rule: QuadratureRule | None = None) -> float:
    """Inverse correlation depth 1/xi.

    The branch is chosen by the sign of the C-map Lyapunov exponent: below
    criticality it is ``-log chi``; above, ``-log`` of the derivative kernel
    at the non-trivial fixed point c*.
    """
    rule = rule or gauss_hermite()
    q_star = fixed_point_q(h, hp, rule=rule)
    x = chi(h, hp, q_star, rule)
    if x <= 1.0:
        return -math.log(x)
    rho_star = fixed_point_rho(h, hp, q_star, rule)
    return -math.log(_cmap_deriv_kernel(rho_star, q_star, h, hp, rule))


# --------------------------------------------------------- critical points

def _h1_at_zero(h: ActivationKernel) -> float:
    return abs(float(h.d1(np.array(0.0))))


def critical_sigma_w(sigma_b: float, h: ActivationKernel, bracket=SIGMA_W_BRACKET,
                     rule: QuadratureRule | None = None) -> float:
    """sigma_w on the order/chaos boundary for the given sigma_b."""
    if sigma_b < 0:
        raise DomainError("sigma_b must be non-negative")
    if h.scale_invariant:
        return math.sqrt(2.0 / (1.0 + h.leak ** 2))
    if sigma_b == 0.0:
        return 1.0 / _h1_at_zero(h)
    rule = rule or gauss_hermite()

    def lam(sw):
        return lyapunov_cmap(h, Hyperparameters(sw, sigma_b), rule)

    lo, hi = bracket
    flo, fhi = lam(lo), lam(hi)
    if flo * fhi > 0:
        raise PreconditionError(
            f"no sign change of the C-map exponent on sigma_w in [{lo}, {hi}] "
            f"(values {flo:.3g}, {fhi:.3g})")
    return optimize.brentq(lam, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def critical_sigma_b(sigma_w: float, h: ActivationKernel, rule: QuadratureRule | None = None) -> float:
    """sigma_b on the boundary for fixed sigma_w; exists only if sigma_w > 1/h'(0)."""
    h.require_smooth("a sigma_b crossing")
    g0 = _h1_at_zero(h)
    if not sigma_w * g0 > 1.0:
        raise PreconditionError(
            f"sigma_w = {sigma_w} <= 1/h'(0) = {1.0 / g0:.6g}: the line of fixed sigma_w "
            "stays in the ordered phase and never crosses the boundary")
    rule = rule or gauss_hermite()

    def lam(sb):
        return lyapunov_cmap(h, Hyperparameters(sigma_w, sb), rule)

    hi = 0.5
    for _ in range(60):
        if lam(hi) < 0:
            break
        hi *= 2.0
    else:
        raise PreconditionError("could not bracket the sigma_b crossing")
    return optimize.brentq(lam, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def phase_of(hp: Hyperparameters, h: ActivationKernel, tol: float = 1e-8,
             rule: QuadratureRule | None = None) -> str:
    """'ordered', 'chaotic' or 'critical' (|lambda_C| < tol)."""
    lam = lyapunov_cmap(h, hp, rule)
    if abs(lam) < tol:
        return "critical"
    return "chaotic" if lam > 0 else "ordered"


def phase_diagram(h: ActivationKernel, sigma_w_grid, sigma_b_grid, rule: QuadratureRule | None = None):
    """lambda_C on a (sigma_b, sigma_w) grid; rows follow ``sigma_b_grid``."""
    out = np.empty((len(sigma_b_grid), len(sigma_w_grid)))
    for i, sb in enumerate(sigma_b_grid):
        for j, sw in enumerate(sigma_w_grid):
            try:
                out[i, j] = lyapunov_cmap(h, Hyperparameters(sw, sb), rule)
            except ConvergenceError:
                out[i, j] = np.nan
    return out
