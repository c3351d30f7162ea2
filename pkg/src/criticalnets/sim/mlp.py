"""Finite-width multilayer perceptrons with Gaussian weights resampled every layer.

The default ``"gram"`` sampler never forms a weight matrix.  For one layer
with fresh weights ``W`` (iid standard normal) the pair ``(W v, W d)`` has
independent rows, each bivariate normal with covariance
``[[v.v, v.d], [v.d, d.d]]``.  Drawing those rows directly costs O(n) normals
instead of O(n^2) and gives exactly the same joint law for the propagated
pair.  The ``"weights"`` sampler draws the full matrices and is kept as a
cross-check.

Both inputs are carried as ``z`` and the difference ``delta = z2 - z1`` so
identical inputs stay identical to the last bit.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from .config import EnsembleSpec, NetworkConfig, PropagationTrace
from .ensemble import layer_generator, map_blocks, reduce_blocks
from .order import ABSORB_RHO, pair_rho

METHODS = ("gram", "weights")


def gram_apply(v: np.ndarray, d: np.ndarray, g: np.ndarray, scale: float):
    """Sample ``(scale W v, scale W d)`` for a fresh standard-normal ``W``.

    ``v`` and ``d`` have shape (lanes, n_src); ``g`` holds standard normals
    of shape (lanes, 2, n_dst).
    """
    vv = np.einsum("ai,ai->a", v, v)
    vd = np.einsum("ai,ai->a", v, d)
    safe = np.where(vv > 0, vv, 1.0)
    coef = np.where(vv > 0, vd / safe, 0.0)
    dp = d - coef[:, None] * v
    pp = np.einsum("ai,ai->a", dp, dp)
    sv = np.sqrt(vv)
    Wv = sv[:, None] * g[:, 0]
    Wd = (coef * sv)[:, None] * g[:, 0] + np.sqrt(pp)[:, None] * g[:, 1]
    return scale * Wv, scale * Wd


def _layer(rng, v, d, n_out, scale, sigma_b, method):
    lanes = v.shape[0]
    if method == "gram":
        g = rng.standard_normal((lanes, 2, n_out))
        Wv, Wd = gram_apply(v, d, g, scale)
    else:
        W = rng.standard_normal((lanes, n_out, v.shape[1]))
        Wv = scale * np.einsum("aij,aj->ai", W, v)
        Wd = scale * np.einsum("aij,aj->ai", W, d)
    b = rng.standard_normal((lanes, n_out))
    return Wv + sigma_b * b, Wd


def _mlp_block(block, lanes, config: NetworkConfig, seed, x1, x2, method, absorb):
    h = config.kernel
    n, L = config.width, config.depth
    v = np.broadcast_to(x1, (lanes, x1.size)).copy()
    d = np.broadcast_to(x2 - x1, (lanes, x1.size)).copy()
    out = np.zeros((lanes, L))
    alive = np.ones(lanes, dtype=bool)
    scale = config.sigma_w / math.sqrt(x1.size)
    for l in range(L):
        rng = layer_generator(seed, block, l)
        z, delta = _layer(rng, v, d, n, scale, config.sigma_b, method)
        delta[~alive] = 0.0
        rho, degenerate = pair_rho(z, delta)
        out[:, l] = np.where(alive, rho, 0.0)
        kill = degenerate | ((rho < absorb) if absorb else False)
        alive &= ~kill
        delta[~alive] = 0.0
        if l + 1 < L:
            v = h.h(z)
            d = h.diff(z, delta)
            scale = config.sigma_w / math.sqrt(n)
    return out


def mlp_pair_trace(x1, x2, config: NetworkConfig, ensemble: EnsembleSpec, method: str = "gram",
                   workers: int | None = None, absorb: float | None = ABSORB_RHO) -> PropagationTrace:
    """Ensemble mean of rho^(l), l = 1..L, for two inputs through random MLPs.

    Runs whose rho falls below ``absorb`` are treated as having reached the
    absorbing state: their difference is zeroed and they report 0 from then on.
    """
    if config.architecture != "mlp":
        raise DomainError(f"mlp_pair_trace needs an mlp config, got {config.architecture}")
    if method not in METHODS:
        raise DomainError(f"method must be one of {METHODS}")
    x1 = np.asarray(x1, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x1.size != config.n_in or x2.size != config.n_in:
        raise DomainError(f"inputs must have length n_in = {config.n_in}")
    blocks = map_blocks(_mlp_block, ensemble, (config, ensemble.seed, x1, x2, method, absorb), workers)
    mean, se = reduce_blocks(blocks, config.depth)
    alive = sum((b > 0).sum(axis=0) for b in blocks) / ensemble.runs
    return PropagationTrace(mean, se, config, ensemble, survival=alive,
                            label=f"n={config.width}", meta={"method": method})


def orthogonal_unit_inputs(n_in: int):
    """e_1 and e_2 scaled to unit norm, the standard decorrelated pair."""
    if n_in < 2:
        raise DomainError("need n_in >= 2")
    x1 = np.zeros(n_in)
    x2 = np.zeros(n_in)
    x1[0] = 1.0
    x2[1] = 1.0
    return x1, x2
