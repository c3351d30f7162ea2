"""Scaling collapses, collapse-quality scoring and exponent/metric-factor fits."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import DomainError


@dataclass(frozen=True)
class ScalingExponents:
    beta: float
    nu_par: float
    nu_perp: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        for v in (self.beta, self.nu_par, self.nu_perp):
            if v is not None and not v > 0:
                raise DomainError("exponents must be positive")

    @property
    def decay(self) -> float:
        """beta / nu_par, the critical power-law decay exponent of rho."""
        return self.beta / self.nu_par


MEANFIELD = ScalingExponents(1.0, 1.0, 0.5, "meanfield")
DP1D = ScalingExponents(0.27649, 1.73385, 1.096854, "dp1d")
DP2D = ScalingExponents(0.58, 1.29, 0.73, "dp2d")
# leaky-ReLU family: rho ~ (kappa l)^-2 at the critical point
SCALE_INVARIANT_FSS = ScalingExponents(2.0, 1.0, None, "scale-invariant-fss")

EXPONENTS = {e.label: e for e in (MEANFIELD, DP1D, DP2D, SCALE_INVARIANT_FSS)}


@dataclass
class Curve:
    """One rescaled series.  ``layers`` keeps the original depth of every point."""

    label: str
    x: np.ndarray
    y: np.ndarray
    layers: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.layers = np.asarray(self.layers, dtype=float)
        if self.x.size > 1 and self.x[0] > self.x[-1]:
            self.x, self.y, self.layers = self.x[::-1], self.y[::-1], self.layers[::-1]


@dataclass
class ScalingCollapse:
    curves: list[Curve]
    quality: float = 0.0
    meta: dict = field(default_factory=dict)

    def rows(self):
        """(curve_label, layer, x, y) rows for CSV output."""
        for c in self.curves:
            for l, x, y in zip(c.layers, c.x, c.y):
                yield c.label, l, x, y


def _series(trace):
    """(layers, rho) from a trace object or a (layers, rho) pair."""
    if hasattr(trace, "rho") and hasattr(trace, "layers"):
        return np.asarray(trace.layers, dtype=float), np.asarray(trace.rho, dtype=float)
    if hasattr(trace, "rho_mean"):
        return np.arange(1, len(trace.rho_mean) + 1, dtype=float), np.asarray(trace.rho_mean, dtype=float)
    layers, rho = trace
    return np.asarray(layers, dtype=float), np.asarray(rho, dtype=float)


def _label(trace, default):
    return getattr(trace, "label", None) or default


def _finish(curves, x_window=None, l_window=None, **meta):
    col = ScalingCollapse(curves, meta=meta)
    col.quality = collapse_quality(col, x_window=x_window, l_window=l_window, allow_single=True)
    return col


# ---------------------------------------------------------------- rescaling

def rescale_offcritical(traces: Sequence, exponents: ScalingExponents, kappa: float, zeta: float,
                        taus: Sequence[float], labels: Sequence[str] | None = None,
                        x_window=None, l_window=None) -> ScalingCollapse:
    """x = (kappa l)^(1/nu) zeta tau,  y = (kappa l)^(beta/nu) rho."""
    if not (kappa > 0 and zeta > 0):
        raise DomainError("kappa and zeta must be positive")
    curves = []
    for i, (tr, tau) in enumerate(zip(traces, taus)):
        l, rho = _series(tr)
        kl = kappa * l
        x = kl ** (1.0 / exponents.nu_par) * zeta * tau
        y = kl ** exponents.decay * rho
        curves.append(Curve(labels[i] if labels else _label(tr, f"tau={tau:+.4g}"), x, y, l))
    return _finish(curves, x_window, l_window, ansatz="offcritical", exponents=exponents.label)


def unrescale_offcritical(curve: Curve, exponents: ScalingExponents, kappa: float):
    """Invert :func:`rescale_offcritical` for one curve: returns (layers, rho)."""
    kl = kappa * curve.layers
    return curve.layers, curve.y / kl ** exponents.decay


def rescale_initial_slip(traces: Sequence, rho0s: Sequence[float], kappa: float, omega: float = 1.0,
                         scale_invariant: bool | Sequence[bool] = False, kappas: Sequence[float] | None = None,
                         labels: Sequence[str] | None = None, x_window=None, l_window=None) -> ScalingCollapse:
    """Critical initial slip.

    K*=0: ``x = omega rho0 kappa l``, ``y = kappa l rho``.
    Scale-invariant: ``x = rho0 (kappa l)^2``, ``y = (kappa l)^2 rho`` (omega = 1).
    ``kappas`` gives a per-trace kappa (e.g. leaky ReLUs with different leaks).
    """
    flags = [scale_invariant] * len(traces) if isinstance(scale_invariant, bool) else list(scale_invariant)
    if len(set(flags)) > 1:
        raise DomainError("cannot mix K*=0 and scale-invariant traces in one collapse")
    si = flags[0] if flags else False
    curves = []
    for i, (tr, r0) in enumerate(zip(traces, rho0s)):
        k = kappas[i] if kappas is not None else kappa
        l, rho = _series(tr)
        kl = k * l
        if si:
            x, y = r0 * kl ** 2, kl ** 2 * rho
        else:
            x, y = omega * r0 * kl, kl * rho
        curves.append(Curve(labels[i] if labels else _label(tr, f"rho0={r0:.3g}"), x, y, l))
    return _finish(curves, x_window, l_window, ansatz="initial-slip", scale_invariant=si)


def unrescale_initial_slip(curve: Curve, kappa: float, scale_invariant: bool = False):
    kl = kappa * curve.layers
    return curve.layers, curve.y / (kl ** 2 if scale_invariant else kl)


def rescale_finite_size(traces: Sequence, widths: Sequence[int], scale_invariant: bool = False,
                        labels: Sequence[str] | None = None, x_window=None, l_window=None) -> ScalingCollapse:
    """x = l / n,  y = n rho (K*=0) or n^2 rho (scale-invariant)."""
    p = 2.0 if scale_invariant else 1.0
    curves = []
    for i, (tr, n) in enumerate(zip(traces, widths)):
        l, rho = _series(tr)
        curves.append(Curve(labels[i] if labels else _label(tr, f"n={n}"), l / n, n ** p * rho, l))
    return _finish(curves, x_window, l_window, ansatz="finite-size", scale_invariant=scale_invariant)


def unrescale_finite_size(curve: Curve, n: int, scale_invariant: bool = False):
    p = 2.0 if scale_invariant else 1.0
    return curve.x * n, curve.y / n ** p


def rescale_dp(traces: Sequence, taus: Sequence[float], exponents: ScalingExponents = DP1D,
               labels: Sequence[str] | None = None, x_window=None, l_window=None) -> ScalingCollapse:
    """x = tau l^(1/nu),  y = l^(beta/nu) rho; metric factors are absorbed into the axes."""
    curves = []
    for i, (tr, tau) in enumerate(zip(traces, taus)):
        l, rho = _series(tr)
        curves.append(Curve(labels[i] if labels else _label(tr, f"tau={tau:+.4g}"),
                            tau * l ** (1.0 / exponents.nu_par), l ** exponents.decay * rho, l))
    return _finish(curves, x_window, l_window, ansatz="dp", exponents=exponents.label)


# ------------------------------------------------------------------ quality

def _bounds(window):
    # None on either side means unbounded
    lo, hi = window
    return (-np.inf if lo is None else lo), (np.inf if hi is None else hi)


def _prepare(curve: Curve, x_window, l_window):
    x, y, l = curve.x, curve.y, curve.layers
    keep = (y > 0) & np.isfinite(y) & np.isfinite(x) & (x != 0)
    if l_window is not None:
        lo, hi = _bounds(l_window)
        keep &= (l >= lo) & (l <= hi)
    if x_window is not None:
        lo, hi = _bounds(x_window)
        ax = np.abs(x)
        keep &= (ax >= lo) & (ax <= hi)
    x, y = x[keep], y[keep]
    if x.size < 2:
        return None
    sign = np.sign(x)
    if np.any(sign != sign[0]):
        raise DomainError(f"curve {curve.label!r} changes sign in x; split it before scoring")
    lx = np.log(np.abs(x))
    order = np.argsort(lx)
    return sign[0], lx[order], np.log(y[order])


def collapse_quality(collapse: ScalingCollapse, x_window=None, l_window=None, n_grid: int = 64,
                     allow_single: bool = False) -> float:
    """Mean pairwise squared distance between log-y curves on a shared log-x grid.

    Curves are compared only against curves on the same side of x = 0 and
    only where their x ranges overlap (and fall inside ``x_window``, given
    as bounds on |x|, and ``l_window``, bounds on the layer index).  Zero
    means perfect collapse.
    """
    prepared = [p for p in (_prepare(c, x_window, l_window) for c in collapse.curves) if p is not None]
    if len(prepared) < 2:
        if allow_single:
            return 0.0
        raise DomainError("need at least two curves with data inside the window")
    dists = []
    for (sa, xa, ya), (sb, xb, yb) in itertools.combinations(prepared, 2):
        if sa != sb:
            continue
        lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
        if not hi > lo:
            continue
        grid = np.linspace(lo, hi, n_grid)
        d = np.interp(grid, xa, ya) - np.interp(grid, xb, yb)
        dists.append(float(np.mean(d * d)))
    if not dists:
        if allow_single:
            return 0.0
        raise DomainError("no two curves overlap inside the window")
    return float(np.mean(dists))


# --------------------------------------------------------------------- fits

@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    amplitude: float
    stderr: float
    window: tuple


def fit_power_law(layers, rho, window=None, stderr=None) -> PowerLawFit:
    """Least squares of log rho on log l; weighted by (rho/stderr)^2 when stderr is given."""
    l = np.asarray(layers, dtype=float)
    r = np.asarray(rho, dtype=float)
    sel = np.ones_like(l, dtype=bool)
    if window is not None:
        sel = (l >= window[0]) & (l <= window[1])
    l, r = l[sel], r[sel]
    if np.any(r <= 0):
        raise DomainError("non-positive values inside the fit window")
    if l.size < 10:
        raise DomainError(f"need at least 10 points in the window, got {l.size}")
    X = np.log(l)
    Y = np.log(r)
    if stderr is not None:
        s = np.asarray(stderr, dtype=float)[sel]
        w = np.where(s > 0, (r / np.where(s > 0, s, 1.0)) ** 2, 0.0)
        if not np.any(w > 0):
            w = np.ones_like(X)
        else:
            w = np.where(w > 0, w, w[w > 0].max())
    else:
        w = np.ones_like(X)
    A = np.stack([np.ones_like(X), X], axis=1)
    Aw = A * np.sqrt(w)[:, None]
    Yw = Y * np.sqrt(w)
    coef, *_ = np.linalg.lstsq(Aw, Yw, rcond=None)
    resid = Yw - Aw @ coef
    dof = max(1, X.size - 2)
    cov = np.linalg.inv(Aw.T @ Aw) * float(resid @ resid) / dof
    win = (float(l[0]), float(l[-1]))
    return PowerLawFit(float(coef[1]), float(math.exp(coef[0])), float(math.sqrt(max(cov[1, 1], 0.0))), win)


def finite_size_solution(layers, n: float, mu: float, kappa: float, rho0: float,
                         scale_invariant: bool = False) -> np.ndarray:
    """Solution of d rho/dl = -(mu/n) rho - kappa rho^2 (or -2 kappa rho^(3/2)), rho(0) = rho0."""
    l = np.asarray(layers, dtype=float)
    if scale_invariant:
        e = np.exp(mu * l / (2.0 * n))
        return mu ** 2 * rho0 / (2.0 * kappa * math.sqrt(rho0) * (e - 1.0) + (mu / n) * e) ** 2 / n ** 2
    e = np.exp(mu * l / n)
    # expm1 keeps the early-depth denominator accurate
    em1 = np.expm1(mu * l / n)
    return rho0 * mu / (rho0 * kappa * em1 + (mu / n) * e) / n


@dataclass(frozen=True)
class FiniteSizeFit:
    mu: float
    kappa: float
    rho0: float
    residual: float
    n: int
    n_points: int
    scale_invariant: bool = False
    window: tuple = ()


def fit_mu(trace, kappa: float, n: int | None = None, scale_invariant: bool = False,
           rho0: float | None = None, window=None, mu_bounds=(1e-3, 50.0), rtol: float = 1e-6) -> FiniteSizeFit:
    """One-parameter fit of mu with kappa fixed from theory.

    ``rho0`` defaults to the measured rho at layer 1, and the model depth is
    counted from there (model time ``l - 1``).  The objective is the sum of
    squared log residuals, minimised by golden-section search on log(mu).
    """
    l, rho = _series(trace)
    if n is None:
        n = getattr(getattr(trace, "config", None), "width", None)
        if n is None:
            raise DomainError("width n is required")
    if rho0 is None:
        rho0 = float(rho[0])
    sel = (rho > 0) & np.isfinite(rho)
    if window is not None:
        sel &= (l >= window[0]) & (l <= window[1])
    l, rho = l[sel], rho[sel]
    if l.size < 10:
        raise DomainError(f"fewer than 10 usable points ({l.size})")
    logr = np.log(rho)
    t = l - 1.0

    def objective(log_mu):
        model = finite_size_solution(t, n, math.exp(log_mu), kappa, rho0, scale_invariant)
        d = np.log(model) - logr
        return float(d @ d)

    grid = np.linspace(math.log(mu_bounds[0]), math.log(mu_bounds[1]), 121)
    vals = np.array([objective(g) for g in grid])
    i = int(np.argmin(vals))
    i = min(max(i, 1), len(grid) - 2)
    res = optimize.minimize_scalar(objective, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                   method="golden", tol=rtol)
    mu = math.exp(res.x)
    return FiniteSizeFit(mu, kappa, rho0, float(res.fun) / l.size, int(n), int(l.size), scale_invariant,
                         (float(l[0]), float(l[-1])))
