"""Desk-scale reproduction pipelines for the figures.

Every pipeline returns a list of :class:`Table` objects (plot-ready rows plus
metadata) and is a pure function of its arguments, so reruns with the same
seed give identical tables.  Ensemble sizes are the desk-scale defaults
documented on each function; ``quick=True`` shrinks everything for smoke tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import meanfield as mf
from . import ntk
from . import scaling as sc
from .activations import get_activation, leaky_relu
from .metric_factors import critical_point, kappa_scale_invariant, omega
from .sim import (EnsembleSpec, NetworkConfig, conv_pair_trace, mlp_pair_trace, orthogonal_unit_inputs,
                  scan_critical_sigma_w)


@dataclass
class Table:
    name: str
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)


def _collapse_table(name, col: sc.ScalingCollapse, meta):
    rows = [(lab, int(l), float(x), float(y)) for lab, l, x, y in col.rows()]
    return Table(name, ("curve", "layer", "x_rescaled", "y_rescaled"), rows,
                 {**meta, "collapse_quality": col.quality})


def log_depths(L_max: int, per_decade: int = 40) -> np.ndarray:
    """Distinct integer depths 1..L_max spaced evenly in log."""
    k = max(2, int(math.log10(max(L_max, 10)) * per_decade))
    return np.unique(np.round(np.logspace(0, math.log10(L_max), k)).astype(int))


def unit_pair(rho0: float, n_in: int = 10):
    """Unit-norm inputs at cosine distance rho0."""
    return ntk.pair_with_distance(rho0, n_in, 1.0)


# ------------------------------------------------------------------ fig 1(d)

def offcritical_traces(activation: str, sigma_b: float = 0.3, zeta_taus=(-1e-2, -3e-3, 3e-3, 1e-2),
                       n_layers: int = 3000, n_in: int = 10):
    """Mean-field traces at sigma_w = sigma_w;c + tau with zeta tau fixed across activations."""
    h = get_activation(activation)
    cp = critical_point(h, sigma_b)
    x1, x2 = orthogonal_unit_inputs(n_in)
    traces, taus = [], []
    for zt in zeta_taus:
        tau = zt / cp.zeta
        tr = mf.meanfield_trace(x1, x2, h, mf.Hyperparameters(cp.sigma_w + tau, sigma_b), n_layers)
        traces.append(tr)
        taus.append(tau)
    return cp, traces, taus


def fig1d(activations=("tanh", "erf", "sin"), n_layers: int = 3000, l_window=(100, None), quick=False):
    """Off-critical mean-field collapse for several activations (no Monte Carlo)."""
    if quick:
        n_layers = 1000
    win = (l_window[0], l_window[1] or n_layers)
    curves, per_act, tables = [], {}, []
    for name in activations:
        cp, traces, taus = offcritical_traces(name, n_layers=n_layers)
        labels = [f"{name} tau={t:+.3e}" for t in taus]
        col = sc.rescale_offcritical(traces, sc.MEANFIELD, cp.kappa, cp.zeta, taus, labels)
        per_act[name] = sc.collapse_quality(col, l_window=win)
        curves.extend(col.curves)
    pooled = sc.ScalingCollapse(curves)
    pooled.quality = sc.collapse_quality(pooled, l_window=win)
    meta = {"figure": "1d", "per_activation_quality": per_act, "l_window": list(win)}
    tables.append(_collapse_table("fig1d_collapse", pooled, meta))
    return tables


# ------------------------------------------------------------------ fig 2

FIG2_RHO0 = (1e-4, 1e-3, 1e-2, 1e-1)


def fig2a(activation="erf", sigma_b=0.3, rho0s=FIG2_RHO0, n_layers=10_000, n_in=10, quick=False):
    """Critical initial slip in mean-field theory, unit-norm inputs."""
    if quick:
        n_layers = 500
    h = get_activation(activation)
    cp = critical_point(h, sigma_b)
    hp = mf.Hyperparameters(cp.sigma_w, sigma_b)
    w = omega(cp.sigma_w, sigma_b, cp.q_star, n_in, input_sq_norm=1.0)
    traces = [mf.meanfield_trace(*unit_pair(r, n_in), h, hp, n_layers) for r in rho0s]
    col = sc.rescale_initial_slip(traces, rho0s, cp.kappa, w)
    keep = set(log_depths(n_layers).tolist())
    col.curves = [sc.Curve(c.label, c.x[np.isin(c.layers, list(keep))], c.y[np.isin(c.layers, list(keep))],
                           c.layers[np.isin(c.layers, list(keep))]) for c in col.curves]
    return [_collapse_table("fig2a_initial_slip", col, {"figure": "2a", "omega": w, **cp.as_dict()})]


def fig2b(activation="erf", sigma_b=0.3, rho0s=FIG2_RHO0, L_max=10_000, n_in=10, quick=False):
    """NTK depth profiles at a critical point, rescaled by x = omega rho0 kappa L."""
    if quick:
        L_max = 300
    h = get_activation(activation)
    cp = critical_point(h, sigma_b)
    w = omega(cp.sigma_w, sigma_b, cp.q_star, n_in, input_sq_norm=1.0)
    profiles = ntk.ntk_profiles(cp, (0.0,) + tuple(rho0s), L_max, n_in, input_sq_norm=1.0)
    col = ntk.ntk_collapse(profiles[1:], cp, w)
    depths = log_depths(L_max)
    rows = []
    for p in profiles:
        for L in depths:
            th = float(p.theta[L - 1])
            x = w * p.rho0 * cp.kappa * L
            rows.append((p.rho0, int(L), th, x, th / (cp.q_star * L)))
    meta = {"figure": "2b", "omega": w, "collapse_quality": col.quality, **cp.as_dict()}
    return [Table("fig2b_ntk", ("rho0", "L", "theta", "x_rescaled", "y_rescaled"), rows, meta)]


# ------------------------------------------------------------------ fig 3

FIG3_WIDTHS = (50, 100, 200, 400)


def finite_size_traces(activation="tanh", sigma_b=0.3, widths=FIG3_WIDTHS, runs=1000, seed=0,
                       depth_factor=4, n_in=10, workers=None, leak=0.0):
    h = get_activation(activation, leak or None)
    cp = critical_point(h, sigma_b)
    x1, x2 = orthogonal_unit_inputs(n_in)
    traces = []
    for i, n in enumerate(widths):
        cfg = NetworkConfig("mlp", n, depth_factor * n, activation, cp.sigma_w, cp.sigma_b, leak=leak, n_in=n_in)
        traces.append(mlp_pair_trace(x1, x2, cfg, EnsembleSpec(runs, seed + i), workers=workers))
    return cp, traces


def _finite_size_tables(name, cp, traces, widths, fit_width, si):
    col = sc.rescale_finite_size(traces, widths, scale_invariant=si)
    fit_tr = traces[list(widths).index(fit_width)]
    fit = sc.fit_mu(fit_tr, cp.kappa, fit_width, scale_invariant=si)
    rows = []
    for tr, n in zip(traces, widths):
        p = 2 if si else 1
        for l, m, s in zip(tr.layers, tr.rho_mean, tr.rho_stderr):
            rows.append((n, int(l), float(m), float(s), l / n, n ** p * m))
    meta = {"collapse_quality": col.quality, "mu": fit.mu, "fit_width": fit_width, "kappa": cp.kappa,
            "runs": traces[0].ensemble.runs, "seeds": [t.ensemble.seed for t in traces]}
    model = sc.finite_size_solution(fit_tr.layers - 1.0, fit_width, fit.mu, cp.kappa, fit.rho0, si)
    curve = [(int(l), float(m), float(r)) for l, m, r in zip(fit_tr.layers, fit_tr.rho_mean, model)]
    return [Table(name, ("n", "layer", "rho_mean", "rho_stderr", "x_rescaled", "y_rescaled"), rows, meta),
            Table(name + "_fit", ("layer", "rho_mean", "rho_model"), curve, {"mu": fit.mu, "n": fit_width})], fit


def fig3a(runs=1000, seed=0, widths=FIG3_WIDTHS, workers=None, quick=False):
    """Finite-width tanh MLPs at criticality; mu fitted at n = 400 (desk scale: 10^3 runs)."""
    if quick:
        runs, widths = 32, (20, 40)
    cp, traces = finite_size_traces("tanh", 0.3, widths, runs, seed, workers=workers)
    tables, _ = _finite_size_tables("fig3a_finite_size", cp, traces, widths, widths[-1], False)
    return tables


def fig3b(sigma_bs=(0.1, 0.2, 0.3, 0.4, 0.5), n=200, runs=500, seed=0, workers=None, quick=False):
    """mu against kappa along the tanh boundary, fitted at n = 200 (desk scale: 500 runs)."""
    if quick:
        sigma_bs, n, runs = (0.2, 0.4), 30, 32
    rows = []
    for i, sb in enumerate(sigma_bs):
        cp, (tr,) = finite_size_traces("tanh", sb, (n,), runs, seed + 100 * i, workers=workers)
        fit = sc.fit_mu(tr, cp.kappa, n)
        rows.append((sb, cp.sigma_w, cp.kappa, fit.mu))
    return [Table("fig3b_mu_kappa", ("sigma_b", "sigma_w", "kappa", "mu"), rows,
                  {"figure": "3b", "n": n, "runs": runs, "seed": seed})]


# ------------------------------------------------------------------ fig 4

def orthonormal_spatial_inputs(n: int, dims: int = 1, seed: int = 0):
    """Two orthogonal unit-norm random inputs on an n (or n x n) grid."""
    rng = np.random.default_rng(seed)
    size = n ** dims
    a = rng.standard_normal(size)
    b = rng.standard_normal(size)
    a /= np.linalg.norm(a)
    b -= a * (a @ b)
    b /= np.linalg.norm(b)
    shape = (n,) * dims
    return a.reshape(shape), b.reshape(shape)


def dp_pipeline(architecture="conv1d", n=200, k=5, c=10, depth=300, sigma_w_grid=None, scan_runs=1000,
                runs=10_000, seed=0, window=(30, None), offsets=(-0.02, -0.01, 0.01, 0.02),
                exponents=sc.DP1D, dtype="float32", workers=None, method="collapse"):
    """Scan for sigma_w;c, measure the critical trace, and compare DP with mean-field rescaling.

    sigma_w;c is the value whose off-critical DP rescaling of the scan traces
    collapses best (``method="collapse"``); the curvature estimate is kept
    in the scan for comparison.  The DP/mean-field comparison then uses
    fresh ensembles at sigma_w;c + ``offsets``.
    """
    dims = 1 if architecture == "conv1d" else 2
    if sigma_w_grid is None:
        sigma_w_grid = np.round(np.arange(1.40, 1.4301, 0.005), 4)
    cfg = NetworkConfig(architecture, n, depth, "tanh", 1.4, 0.3, channels=c, kernel_size=k, dtype=dtype)
    inputs = orthonormal_spatial_inputs(n, dims, seed)
    win = (window[0], window[1] or depth)
    scan = scan_critical_sigma_w(cfg, EnsembleSpec(scan_runs, seed + 1), sigma_w_grid, win, inputs, workers,
                                 method, exponents)
    crit = conv_pair_trace(*inputs, cfg.replace(sigma_w=scan.sigma_c), EnsembleSpec(runs, seed + 2), workers)
    fit = sc.fit_power_law(crit.layers, crit.rho_mean, win, crit.rho_stderr)
    off = [conv_pair_trace(*inputs, cfg.replace(sigma_w=scan.sigma_c + d), EnsembleSpec(scan_runs, seed + 3 + i),
                           workers) for i, d in enumerate(offsets)]
    dp = sc.rescale_dp(off, offsets, exponents)
    mfc = sc.rescale_dp(off, offsets, sc.MEANFIELD)
    q_dp = sc.collapse_quality(dp, l_window=win)
    q_mf = sc.collapse_quality(mfc, l_window=win)
    return {"scan": scan, "critical": crit, "fit": fit, "offcritical": off, "dp": dp, "mf": mfc,
            "quality_dp": q_dp, "quality_mf": q_mf, "window": win, "config": cfg}


def _dp_tables(name, res, figure):
    scan = res["scan"]
    meta = {"figure": figure, "sigma_c": scan.sigma_c, "sigma_c_method": scan.method,
            "sigma_c_curvature": scan.sigma_c_curvature, "exponent": res["fit"].exponent,
            "exponent_stderr": res["fit"].stderr, "quality_dp": res["quality_dp"],
            "quality_mf": res["quality_mf"], "window": list(res["window"]),
            "config": res["config"].as_dict()}
    crit = res["critical"]
    rows = [(int(l), float(m), float(s), crit.ensemble.runs) for l, m, s in
            zip(crit.layers, crit.rho_mean, crit.rho_stderr)]
    scan_rows = [(float(s), float(cu), float(sl)) for s, cu, sl in zip(scan.sigma_w, scan.curvature, scan.slope)]
    return [Table(name + "_critical", ("layer", "rho_mean", "rho_stderr", "runs"), rows, meta),
            Table(name + "_scan", ("sigma_w", "curvature", "slope"), scan_rows, {"figure": figure}),
            _collapse_table(name + "_dp_collapse", res["dp"], {"figure": figure})]


def fig4a(runs=10_000, scan_runs=1000, seed=0, workers=None, quick=False):
    """1D conv, n = 200, k = 5, c = 10 (desk scale: 10^4 runs at the scanned critical point)."""
    if quick:
        res = dp_pipeline(n=40, depth=60, sigma_w_grid=(1.38, 1.40, 1.42, 1.44), scan_runs=16, runs=16,
                          seed=seed, window=(10, None), workers=workers)
    else:
        res = dp_pipeline(runs=runs, scan_runs=scan_runs, seed=seed, workers=workers)
    return _dp_tables("fig4a", res, "4a")


def fig4b(runs=2000, scan_runs=400, seed=0, workers=None, quick=False):
    """2D conv, n = 64, k = 3, c = 4 (desk scale: 2x10^3 runs)."""
    if quick:
        res = dp_pipeline("conv2d", n=12, k=3, c=4, depth=40, sigma_w_grid=(1.37, 1.39, 1.41, 1.43), scan_runs=8, runs=8,
                          seed=seed, window=(10, None), exponents=sc.DP2D, workers=workers)
    else:
        res = dp_pipeline("conv2d", n=64, k=3, c=4, depth=150, scan_runs=scan_runs, runs=runs, seed=seed,
                          window=(15, None), exponents=sc.DP2D, workers=workers,
                          sigma_w_grid=np.round(np.arange(1.38, 1.4301, 0.01), 4))
    return _dp_tables("fig4b", res, "4b")


# ------------------------------------------------------------------ fig 5

def fig5b(leaks=(0.0, 0.2, 0.5), rho0s=(1e-4, 1e-3, 1e-2, 1e-1), n_layers=5000, n_in=10, quick=False):
    """Initial slip of the leaky-ReLU family at sigma_b = 0, x = rho0 (kappa l)^2."""
    if quick:
        n_layers = 200
    traces, r0s, kappas, labels = [], [], [], []
    for a in leaks:
        h = leaky_relu(a)
        hp = mf.Hyperparameters(mf.critical_sigma_w(0.0, h), 0.0)
        for r in rho0s:
            traces.append(mf.meanfield_trace(*unit_pair(r, n_in), h, hp, n_layers))
            r0s.append(r)
            kappas.append(kappa_scale_invariant(a))
            labels.append(f"a={a:g} rho0={r:g}")
    col = sc.rescale_initial_slip(traces, r0s, 0.0 + kappas[0], scale_invariant=True, kappas=kappas,
                                  labels=labels)
    keep = log_depths(n_layers)
    col.curves = [sc.Curve(c.label, *(arr[np.isin(c.layers, keep)] for arr in (c.x, c.y, c.layers)))
                  for c in col.curves]
    return [_collapse_table("fig5b_scale_invariant_slip", col, {"figure": "5b", "leaks": list(leaks)})]


def fig5c(runs=1000, seed=0, widths=FIG3_WIDTHS, fit_width=200, workers=None, quick=False):
    """Finite-width ReLU MLPs at (sqrt 2, 0); mu fitted at n = 200 (desk scale: 10^3 runs)."""
    if quick:
        runs, widths, fit_width = 32, (20, 40), 40
    cp, traces = finite_size_traces("relu", 0.0, widths, runs, seed, workers=workers)
    tables, _ = _finite_size_tables("fig5c_relu_finite_size", cp, traces, widths, fit_width, True)
    return tables


TARGETS = {
    "fig1d": fig1d, "fig2a": fig2a, "fig2b": fig2b, "fig3a": fig3a, "fig3b": fig3b,
    "fig4a": fig4a, "fig4b": fig4b, "fig5b": fig5b, "fig5c": fig5c,
}
