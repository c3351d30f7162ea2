"""Circular-padded convolutional networks: order-parameter traces, noise spread, critical scan.

Layer update for channel ``o`` (cross-correlation, offsets ``-(k-1)/2 .. (k-1)/2``
in every spatial direction, periodic wrap):

    z'[o] = sigma_w / sqrt(c k^d) sum_m w[o, m] * h(z[m]) + sigma_b b[o]

Filters and per-site biases are standard normal and redrawn every layer.
The first layer reads a single-channel input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DomainError
from ..scaling import DP1D, DP2D, ScalingExponents, collapse_quality, fit_power_law, rescale_dp
from .config import EnsembleSpec, NetworkConfig, PropagationTrace
from .ensemble import layer_generator, map_blocks, reduce_blocks
from .order import ABSORB_RHO, pair_rho

DEFAULT_SPREAD_THRESHOLD = 0.1


def _patches(x: np.ndarray, k: int, dims: int, n: int) -> np.ndarray:
    """(A, c, n^d) -> (A, c k^d, n^d) circular neighbourhoods in filter order."""
    A, c, _ = x.shape
    r = (k - 1) // 2
    if dims == 1:
        xp = np.pad(x, ((0, 0), (0, 0), (r, r)), mode="wrap")
        win = sliding_window_view(xp, k, axis=-1)                      # (A, c, n, k)
        return win.transpose(0, 1, 3, 2).reshape(A, c * k, n)
    xs = x.reshape(A, c, n, n)
    xp = np.pad(xs, ((0, 0), (0, 0), (r, r), (r, r)), mode="wrap")
    win = sliding_window_view(xp, (k, k), axis=(-2, -1))               # (A, c, n, n, k, k)
    return win.transpose(0, 1, 4, 5, 2, 3).reshape(A, c * k * k, n * n)


def _check_inputs(x1, x2, config: NetworkConfig):
    if config.architecture not in ("conv1d", "conv2d"):
        raise DomainError(f"need a conv config, got {config.architecture}")
    shape = (config.width,) * config.spatial_dims
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != shape or x2.shape != shape:
        raise DomainError(f"inputs must have shape {shape}")
    return x1.ravel(), x2.ravel()


def _conv_block(block, lanes, config: NetworkConfig, seed, x1, x2, absorb, threshold):
    h = config.kernel
    dt = np.dtype(config.dtype)
    n, k, c, L, d = config.width, config.kernel_size, config.channels, config.depth, config.spatial_dims
    S = n ** d
    rho_out = np.zeros((lanes, L))
    width_out = np.zeros((lanes, L)) if threshold is not None else None

    idx = np.arange(lanes)                     # lanes still alive
    v = np.broadcast_to(x1.astype(dt), (lanes, 1, S)).copy()
    dv = np.broadcast_to((x2 - x1).astype(dt), (lanes, 1, S)).copy()
    c_in = 1
    for l in range(L):
        rng = layer_generator(seed, block, l)
        W = rng.standard_normal((lanes, c, c_in * k ** d), dtype=dt)
        b = rng.standard_normal((lanes, c, S), dtype=dt)
        if idx.size == 0:
            break
        W, b = W[idx], b[idx]
        scale = dt.type(config.sigma_w / math.sqrt(c_in * k ** d))
        P = np.concatenate([_patches(v, k, d, n), _patches(dv, k, d, n)], axis=-1)
        out = np.matmul(W, P)
        z = scale * out[..., :S] + dt.type(config.sigma_b) * b
        delta = scale * out[..., S:]
        # per-channel rho, averaged over channels
        rho_c, degenerate = pair_rho(z, delta)
        rho = rho_c.mean(axis=1)
        dead = degenerate.any(axis=1)
        rho = np.where(dead, 0.0, rho)
        rho_out[idx, l] = rho
        if threshold is not None:
            rms = np.sqrt(np.mean(np.square(z, dtype=np.float64), axis=(1, 2)))
            site = np.sqrt(np.mean(np.square(delta, dtype=np.float64), axis=1))
            width_out[idx, l] = np.where(dead, 0, np.count_nonzero(site > threshold * rms[:, None], axis=1))
        keep = ~dead
        if absorb:
            keep &= rho >= absorb
        idx, z, delta = idx[keep], z[keep], delta[keep]
        if l + 1 < L:
            v = h.h(z)
            dv = h.diff(z, delta)
            c_in = c
    return rho_out, width_out


def _rho_block(block, lanes, config, seed, x1, x2, absorb):
    return _conv_block(block, lanes, config, seed, x1, x2, absorb, None)[0]


def conv_pair_trace(x1, x2, config: NetworkConfig, ensemble: EnsembleSpec, workers: int | None = None,
                    absorb: float | None = ABSORB_RHO) -> PropagationTrace:
    """Ensemble mean of the channel-averaged rho^(l) for a pair of spatial inputs."""
    x1, x2 = _check_inputs(x1, x2, config)
    blocks = map_blocks(_rho_block, ensemble, (config, ensemble.seed, x1, x2, absorb), workers)
    mean, se = reduce_blocks(blocks, config.depth)
    alive = sum((b > 0).sum(axis=0) for b in blocks) / ensemble.runs
    return PropagationTrace(mean, se, config, ensemble, survival=alive,
                            label=f"sigma_w={config.sigma_w:.5g}")


def random_inputs(config: NetworkConfig, seed: int = 0):
    """Two independent standard-normal spatial inputs."""
    rng = np.random.default_rng(seed)
    shape = (config.width,) * config.spatial_dims
    return rng.standard_normal(shape), rng.standard_normal(shape)


def single_pixel_pair(config: NetworkConfig, seed: int = 0, amplitude: float = 1.0):
    """A standard-normal input and a copy differing only at the central pixel."""
    rng = np.random.default_rng(seed)
    shape = (config.width,) * config.spatial_dims
    x1 = rng.standard_normal(shape)
    x2 = x1.copy()
    centre = tuple(s // 2 for s in shape)
    x2[centre] += amplitude
    return x1, x2


# ------------------------------------------------------------------- spread

@dataclass
class SpreadTrace:
    """Spread width per layer.

    ``width_mean`` averages over runs whose difference is still alive at that
    layer; ``width_all`` averages over every run (dead runs count as 0).
    """

    width_mean: np.ndarray
    width_stderr: np.ndarray
    width_all: np.ndarray
    survival: np.ndarray
    threshold: float
    config: NetworkConfig
    ensemble: EnsembleSpec

    @property
    def layers(self) -> np.ndarray:
        return np.arange(1, len(self.width_mean) + 1)

    def pairs(self) -> list[tuple[int, float]]:
        return [(int(l), float(w)) for l, w in zip(self.layers, self.width_mean)]

    def exponent(self, window=(100, 1000)):
        """Log-log slope of the surviving-run width over ``window``."""
        ok = self.width_mean > 0
        return fit_power_law(self.layers[ok], self.width_mean[ok], window)


def _spread_block(block, lanes, config, seed, x1, x2, threshold):
    # no numerical absorption: a shrinking difference is still "alive" until it vanishes
    return _conv_block(block, lanes, config, seed, x1, x2, None, threshold)[1]


def measure_spread(config: NetworkConfig, ensemble: EnsembleSpec, threshold: float = DEFAULT_SPREAD_THRESHOLD,
                   inputs=None, workers: int | None = None) -> SpreadTrace:
    """Propagate a single-pixel perturbation and record how many sites it reaches.

    A site counts as reached when the channel-RMS of the preactivation
    difference exceeds ``threshold`` times the RMS preactivation of the layer.
    """
    if not threshold > 0:
        raise DomainError("threshold must be positive")
    x1, x2 = inputs if inputs is not None else single_pixel_pair(config)
    x1, x2 = _check_inputs(x1, x2, config)
    blocks = map_blocks(_spread_block, ensemble, (config, ensemble.seed, x1, x2, threshold), workers)
    L = config.depth
    alive = np.zeros(L)
    s1 = np.zeros(L)
    s2 = np.zeros(L)
    for w in blocks:
        a = w > 0
        alive += a.sum(axis=0)
        s1 += w.sum(axis=0)
        s2 += (w * w).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(alive > 0, s1 / np.maximum(alive, 1), 0.0)
        var = np.where(alive > 1, (s2 - alive * mean ** 2) / np.maximum(alive - 1, 1), 0.0)
        se = np.sqrt(np.maximum(var, 0.0) / np.maximum(alive, 1))
    return SpreadTrace(mean, se, s1 / ensemble.runs, alive / ensemble.runs, threshold, config, ensemble)


# ------------------------------------------------------------ critical scan

@dataclass
class CriticalScan:
    sigma_w: np.ndarray
    curvature: np.ndarray
    slope: np.ndarray
    sigma_c: float
    traces: list = field(default_factory=list)
    window: tuple = ()
    method: str = "curvature"
    sigma_c_curvature: float = math.nan


def loglog_curvature(layers, rho, window):
    """Quadratic coefficient and local slope of log rho vs log l over ``window``."""
    l = np.asarray(layers, dtype=float)
    r = np.asarray(rho, dtype=float)
    sel = (l >= window[0]) & (l <= window[1]) & (r > 0)
    if sel.sum() < 10:
        return math.nan, math.nan
    X = np.log(l[sel])
    X0 = X.mean()
    coef = np.polyfit(X - X0, np.log(r[sel]), 2)
    return float(coef[0]), float(coef[1])


def scan_critical_sigma_w(config: NetworkConfig, ensemble: EnsembleSpec, sigma_w_grid, window=(20, None),
                          inputs=None, workers: int | None = None, method: str = "curvature",
                          exponents: ScalingExponents | None = None) -> CriticalScan:
    """Locate the finite-network critical sigma_w from traces on a sigma_w grid.

    ``method="curvature"`` looks for straightness of log rho vs log l.  The
    curvature of a quadratic fit is negative on the ordered side and rises
    through zero towards the chaotic side, where it turns over again as rho
    approaches its plateau.  The estimate is the root of a least-squares
    line through the rising branch (grid start up to the curvature maximum),
    which averages the Monte-Carlo noise of single grid points.

    ``method="collapse"`` picks the sigma_c whose off-critical rescaling
    (``exponents``, DP of the lattice dimension by default) collapses the
    grid traces best; see :func:`critical_from_collapse`.  The curvature
    estimate is always reported as ``sigma_c_curvature``.
    """
    if method not in ("curvature", "collapse"):
        raise DomainError(f"unknown method {method!r}")
    grid = np.asarray(sorted(sigma_w_grid), dtype=float)
    win = (window[0], window[1] if window[1] is not None else config.depth)
    x1, x2 = inputs if inputs is not None else random_inputs(config)
    curv, slope, traces = [], [], []
    for sw in grid:
        tr = conv_pair_trace(x1, x2, config.replace(sigma_w=float(sw)), ensemble, workers)
        cu, sl = loglog_curvature(tr.layers, tr.rho_mean, win)
        curv.append(cu)
        slope.append(sl)
        traces.append(tr)
    curv = np.array(curv)
    slope = np.array(slope)
    if not np.isfinite(curv).any():
        raise DomainError("no usable trace in the scan window")
    by_curv = critical_from_curvature(grid, curv)
    sigma_c = by_curv
    if method == "collapse":
        if exponents is None:
            exponents = DP1D if config.spatial_dims == 1 else DP2D
        sigma_c = critical_from_collapse(grid, traces, exponents, win)
    return CriticalScan(grid, curv, slope, sigma_c, traces, win, method, by_curv)


def critical_from_collapse(grid, traces, exponents: ScalingExponents, l_window, n_candidates: int = 121) -> float:
    """sigma_c minimising the off-critical collapse quality of ``traces`` taken at ``grid``.

    Candidates span the interior of the grid (so both phases are present);
    traces closer than 0.4 grid spacings to a candidate are left out, since
    their tau is too small to place them on the scaling function.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 4:
        raise DomainError("the collapse estimate needs at least 4 grid points")
    min_tau = 0.4 * float(np.min(np.diff(grid)))
    best = (math.inf, math.nan)
    for cand in np.linspace(grid[1], grid[-2], n_candidates):
        taus = grid - cand
        use = np.abs(taus) >= min_tau
        if not (np.any(taus[use] < 0) and np.any(taus[use] > 0)):
            continue
        col = rescale_dp([t for t, u in zip(traces, use) if u], taus[use], exponents)
        try:
            q = collapse_quality(col, l_window=l_window)
        except DomainError:
            # no overlapping branch for this candidate
            continue
        if q < best[0]:
            best = (q, float(cand))
    if not math.isfinite(best[1]):
        raise DomainError("no candidate sigma_c gave a usable collapse")
    return best[1]


def critical_from_curvature(grid, curv) -> float:
    """Zero of curvature(sigma_w) on its rising branch; see :func:`scan_critical_sigma_w`."""
    grid = np.asarray(grid, dtype=float)
    curv = np.asarray(curv, dtype=float)
    ok = np.isfinite(curv)
    g, c = grid[ok], curv[ok]
    top = int(np.argmax(c))
    if top >= 2 and c[0] < 0 < c[top]:
        a, b = np.polyfit(g[:top + 1], c[:top + 1], 1)
        if a > 0 and g[0] <= -b / a <= g[top]:
            return float(-b / a)
    for i in range(len(g) - 1):
        if c[i] < 0 <= c[i + 1]:
            return float(g[i] + (g[i + 1] - g[i]) * (-c[i]) / (c[i + 1] - c[i]))
    return float(g[np.argmin(np.abs(c))])
