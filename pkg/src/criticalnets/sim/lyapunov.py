"""Largest Lyapunov exponent of the layer-to-layer map of a finite MLP.

A tangent vector ``u`` is pushed through the layer Jacobians
``J = (sigma_w / sqrt(n)) W diag(h'(z))`` and renormalised every layer; the
exponent is the mean log growth after a burn-in.  Weights are fresh every
layer, so the forward state and the tangent can share the Gram sampler of
:mod:`criticalnets.sim.mlp`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from ..errors import ConvergenceError, DomainError
from .config import EnsembleSpec, NetworkConfig
from .ensemble import layer_generator, map_blocks
from .mlp import gram_apply

UNDERFLOW = 1e-300
# stream slot for the initial state, outside the range of layer indices
INIT_SLOT = 2 ** 32 - 1


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    per_run: np.ndarray
    l_max: int
    burn_in: int


def _lyap_block(block, lanes, config: NetworkConfig, seed, l_max, burn_in):
    h = config.kernel
    n = config.width
    init = layer_generator(seed, block, INIT_SLOT)
    z = init.standard_normal((lanes, n))
    u = init.standard_normal((lanes, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    acc = np.zeros(lanes)
    scale = config.sigma_w / math.sqrt(n)
    for l in range(l_max):
        rng = layer_generator(seed, block, l)
        g = rng.standard_normal((lanes, 2, n))
        b = rng.standard_normal((lanes, n))
        zn, un = gram_apply(h.h(z), h.d1(z) * u, g, scale)
        norm = np.linalg.norm(un, axis=1)
        if np.any(norm < UNDERFLOW):
            raise ConvergenceError(f"tangent norm underflow at layer {l + 1}", last=tuple(norm))
        u = un / norm[:, None]
        z = zn + config.sigma_b * b
        if l >= burn_in:
            acc += np.log(norm)
    return acc / (l_max - burn_in)


def lyapunov_finite(config: NetworkConfig, ensemble: EnsembleSpec, l_max: int = 10_000,
                    burn_in: int = 1_000, workers: int | None = None) -> LyapunovEstimate:
    """Per-layer largest Lyapunov exponent with its run-to-run standard error."""
    if config.architecture != "mlp":
        raise DomainError("the Lyapunov estimator is defined for mlp configs")
    if not 0 <= burn_in < l_max:
        raise DomainError("need 0 <= burn_in < l_max")
    blocks = map_blocks(_lyap_block, ensemble, (config, ensemble.seed, l_max, burn_in), workers)
    per_run = np.concatenate(blocks)
    se = float(per_run.std(ddof=1) / math.sqrt(per_run.size)) if per_run.size > 1 else 0.0
    return LyapunovEstimate(float(per_run.mean()), se, per_run, l_max, burn_in)


def linear_lyapunov(sigma_w: float, n: int) -> float:
    """Exact exponent for h(z) = z: log sigma_w + (digamma(n/2) - log(n/2)) / 2."""
    return math.log(sigma_w) + 0.5 * (float(digamma(n / 2.0)) - math.log(n / 2.0))
