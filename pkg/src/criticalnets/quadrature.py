"""Gauss-Hermite rules for expectations under the standard normal measure.

Every Gaussian integral in the mean-field theory is of the form

    E[f(z)]            = sum_i w_i f(z_i)
    E[f(z1, z2)]       = sum_ij w_i w_j f(z_i, z_j)

with ``z ~ N(0, 1)``.  Correlated pairs are never integrated against a
correlated density; callers build ``u1 = sqrt(q1) z1`` and
``u2 = sqrt(q2) (c z1 + sqrt(1 - c^2) z2)`` on the product grid instead
(see :func:`correlated_pair`).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

DEFAULT_ORDER = 128
MAX_ORDER = 1024


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of an ``order``-point rule for N(0, 1)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if self.nodes.shape != (self.order,) or self.weights.shape != (self.order,):
            raise DomainError("nodes and weights must both have length `order`")
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __hash__(self):
        return hash(self.order)

    def __eq__(self, other):
        return isinstance(other, QuadratureRule) and self.order == other.order


@functools.lru_cache(maxsize=None)
def gauss_hermite(order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Return the probabilists' Gauss-Hermite rule with ``order`` nodes.

    Nodes are symmetrised exactly and the weights renormalised so that
    ``sum(w) == 1`` to machine precision.  Far-tail nodes whose weight
    underflows to zero (orders above ~700) are dropped.
    """
    if order < 1:
        raise DomainError(f"order must be positive, got {order}")
    z, w = special.roots_hermitenorm(order)
    z = 0.5 * (z - z[::-1])
    w = 0.5 * (w + w[::-1])
    keep = w > 0
    z, w = z[keep], w[keep]
    w = w / w.sum()
    return QuadratureRule(nodes=z, weights=w, order=int(z.size))


def rule_for_variance(q: float, rule: QuadratureRule | None = None) -> QuadratureRule:
    """A rule fine enough for integrands of ``sqrt(q) z``.

    Steep activations at large variance need more nodes; the order grows
    in proportion to ``q`` above ``q = 1`` (capped at ``MAX_ORDER``) and
    never drops below that of ``rule``.
    """
    base = rule or gauss_hermite()
    if not q > 1.0:
        return base
    need = min(MAX_ORDER, DEFAULT_ORDER * 2 ** math.ceil(math.log2(q)))
    return base if base.order >= need else gauss_hermite(need)


def _check_finite(values, nodes, what):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        where = tuple(float(n[i]) for n, i in zip(nodes, idx))
        raise DomainError(f"{what} is not finite at node {where if len(where) > 1 else where[0]}")


def expect1(f, rule: QuadratureRule | None = None) -> float:
    """E[f(z)] for z ~ N(0, 1).  ``f`` must accept a numpy array."""
    rule = rule or gauss_hermite()
    vals = np.asarray(f(rule.nodes), dtype=float)
    if vals.shape != rule.nodes.shape:
        vals = np.broadcast_to(vals, rule.nodes.shape)
    _check_finite(vals, (rule.nodes,), "integrand")
    return float(np.dot(rule.weights, vals))


def expect2(f, rule: QuadratureRule | None = None) -> float:
    """E[f(z1, z2)] for independent standard normals (tensor-product rule).

    ``f`` is called once as ``f(Z1, Z2)`` with ``Z1`` of shape (m, 1) and
    ``Z2`` of shape (1, m), so ordinary numpy broadcasting applies.
    """
    rule = rule or gauss_hermite()
    z = rule.nodes
    vals = np.asarray(f(z[:, None], z[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (rule.order, rule.order))
    _check_finite(vals, (z, z), "integrand")
    w = rule.weights
    return float(w @ vals @ w)


def correlated_pair(q1: float, q2: float, rho: float, rule: QuadratureRule | None = None):
    """Product-grid preactivations for a pair with variances q1, q2 and correlation 1 - rho.

    Returns ``(u1, du)`` where ``u1 = sqrt(q1) z1`` and ``du = u2 - u1``.
    The difference is formed from ``rho`` directly,

        u2 - u1 = (sqrt(q2) - sqrt(q1)) z1 + sqrt(q2) (-rho z1 + sqrt(rho (2 - rho)) z2),

    so it stays accurate when the pair is nearly identical.
    """
    rule = rule or gauss_hermite()
    if not 0.0 <= rho <= 2.0:
        raise DomainError(f"rho = 1 - c must lie in [0, 2], got {rho}")
    z = rule.nodes
    z1 = z[:, None]
    z2 = z[None, :]
    s1, s2 = np.sqrt(q1), np.sqrt(q2)
    u1 = s1 * z1 + 0.0 * z2
    du = (s2 - s1) * z1 + s2 * (-rho * z1 + np.sqrt(rho * (2.0 - rho)) * z2)
    return u1, du


def weight_matrix(rule: QuadratureRule | None = None) -> np.ndarray:
    rule = rule or gauss_hermite()
    return np.outer(rule.weights, rule.weights)
