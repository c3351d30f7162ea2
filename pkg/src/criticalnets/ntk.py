"""Neural tangent kernel of the infinitely wide MLP and its linearised training dynamics.

The kernel is assembled from a mean-field trace of the input pair,

    Theta^(L) = sum_{l=1}^{L+1} C^(l) prod_{l'=l}^{L} Cdot^(l'),
    Cdot^(l) = sigma_w^2 E[h'(u1^(l)) h'(u2^(l))],

with the suffix products accumulated in a single backward pass.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import meanfield as mf
from .activations import ActivationKernel
from .errors import DomainError, PreconditionError
from .metric_factors import CriticalPoint
from .quadrature import QuadratureRule, gauss_hermite
from .scaling import Curve, ScalingCollapse, collapse_quality

PSD_TOL = 1e-8


@dataclass
class NTKMatrix:
    entries: np.ndarray
    depth: int
    hp: mf.Hyperparameters

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError(f"kernel matrix must be square, got shape {A.shape}")
        scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
            raise DomainError("kernel matrix is not symmetric")
        A = 0.5 * (A + A.T)
        if np.any(np.diag(A) <= 0):
            raise DomainError("kernel diagonal must be strictly positive")
        lam_min = float(np.linalg.eigvalsh(A)[0])
        if lam_min < -PSD_TOL * float(np.trace(A)):
            raise DomainError(f"kernel matrix is not positive semidefinite (min eigenvalue {lam_min:.3g})")
        self.entries = A

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass
class TrainingDynamics:
    eta: float
    n_samples: int
    t: np.ndarray
    residuals: np.ndarray
    test_outputs: Optional[np.ndarray] = None

    def residual_norms(self) -> np.ndarray:
        return np.linalg.norm(self.residuals, axis=1)


# ------------------------------------------------------------------- kernel

def theta_from_trace(trace: mf.MeanFieldTrace, L: int) -> float:
    """Theta^(L) from a trace holding at least L + 1 layers and their Cdot values."""
    if L < 1:
        raise DomainError(f"depth L must be >= 1, got {L}")
    if trace.cdot is None:
        raise PreconditionError("trace was built without derivative covariances")
    if len(trace) < L + 1:
        raise PreconditionError(f"trace has {len(trace)} layers, need {L + 1}")
    C, cd = trace.C, trace.cdot
    total = float(C[L])
    acc = 1.0
    for l in range(L, 0, -1):
        acc *= float(cd[l - 1])
        total += float(C[l - 1]) * acc
    return total


def theta_profile(trace: mf.MeanFieldTrace) -> np.ndarray:
    """Theta^(L) for L = 1 .. len(trace) - 1 via Theta^(L) = Theta^(L-1) Cdot^(L) + C^(L+1)."""
    if trace.cdot is None:
        raise PreconditionError("trace was built without derivative covariances")
    C, cd = trace.C, trace.cdot
    out = np.empty(len(trace) - 1)
    theta = float(C[0])
    for L in range(1, len(trace)):
        theta = theta * float(cd[L - 1]) + float(C[L])
        out[L - 1] = theta
    return out


def ntk_value(x1, x2, L: int, h: ActivationKernel, hp: mf.Hyperparameters,
              rule: QuadratureRule | None = None) -> float:
    """Closed-form NTK Theta^(L)(x1, x2) at initialisation."""
    if L < 1:
        raise DomainError(f"depth L must be >= 1, got {L}")
    trace = mf.meanfield_trace(x1, x2, h, hp, L + 1, rule, with_deriv=True)
    return theta_from_trace(trace, L)


def ntk_matrix(X, L: int, h: ActivationKernel, hp: mf.Hyperparameters,
               rule: QuadratureRule | None = None) -> NTKMatrix:
    """Train kernel over the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = X.shape[0]
    A = np.empty((N, N))
    for i, j in itertools.combinations_with_replacement(range(N), 2):
        A[i, j] = A[j, i] = ntk_value(X[i], X[j], L, h, hp, rule)
    return NTKMatrix(A, L, hp)


def ntk_rows(X_test, X_train, L: int, h: ActivationKernel, hp: mf.Hyperparameters,
             rule: QuadratureRule | None = None) -> np.ndarray:
    """Test rows Theta^(L)(x_test, x_train), shape (M, N)."""
    Xt = np.atleast_2d(np.asarray(X_test, dtype=float))
    Xn = np.atleast_2d(np.asarray(X_train, dtype=float))
    out = np.empty((Xt.shape[0], Xn.shape[0]))
    for i, j in itertools.product(range(Xt.shape[0]), range(Xn.shape[0])):
        out[i, j] = ntk_value(Xt[i], Xn[j], L, h, hp, rule)
    return out


def pair_with_distance(rho0: float, n_in: int, sq_norm: float):
    """Two inputs of squared norm ``sq_norm`` whose cosine distance is ``rho0``."""
    if not 0.0 <= rho0 <= 2.0:
        raise DomainError(f"cosine distance must lie in [0, 2], got {rho0}")
    if n_in < 2:
        raise DomainError("need at least two input dimensions")
    r = math.sqrt(sq_norm)
    x1 = np.zeros(n_in)
    x2 = np.zeros(n_in)
    x1[0] = r
    x2[0] = r * (1.0 - rho0)
    x2[1] = r * math.sqrt(rho0 * (2.0 - rho0))
    return x1, x2


def critical_input_norm(cp: CriticalPoint, n_in: int) -> float:
    """Squared input norm that puts the first layer at q^(1) = q*_c."""
    return n_in * (cp.q_star - cp.sigma_b ** 2) / cp.sigma_w ** 2


# ----------------------------------------------------------------- collapse

@dataclass
class NTKProfile:
    """Theta^(L) for L = 1 .. L_max at one input distance."""

    rho0: float
    theta: np.ndarray
    hp: mf.Hyperparameters
    activation: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def depths(self) -> np.ndarray:
        return np.arange(1, len(self.theta) + 1)


def ntk_profiles(cp: CriticalPoint, rho0s: Sequence[float], L_max: int, n_in: int = 10,
                 input_sq_norm: float | None = None, rule: QuadratureRule | None = None) -> list[NTKProfile]:
    """Depth profiles of the NTK at a critical point.

    Inputs have squared norm ``input_sq_norm``; by default the norm that
    puts the first layer at q^(1) = q*_c.
    """
    hp = mf.Hyperparameters(cp.sigma_w, cp.sigma_b)
    s = critical_input_norm(cp, n_in) if input_sq_norm is None else input_sq_norm
    out = []
    for r0 in rho0s:
        x1, x2 = pair_with_distance(r0, n_in, s)
        tr = mf.meanfield_trace(x1, x2, cp.activation, hp, L_max + 1, rule, with_deriv=True)
        out.append(NTKProfile(float(r0), theta_profile(tr), hp, cp.activation.name))
    return out


def ntk_collapse(profiles: Sequence[NTKProfile], cp: CriticalPoint, omega: float = 1.0,
                 L_window=None) -> ScalingCollapse:
    """Rescale NTK profiles to x = omega rho0 kappa L (or rho0 (kappa L)^2), y = Theta / (q*_c L)."""
    hp = mf.Hyperparameters(cp.sigma_w, cp.sigma_b)
    for p in profiles:
        if p.hp != hp or (p.activation and p.activation != cp.activation.name):
            raise DomainError(
                f"profile at rho0={p.rho0} was built at {p.hp} ({p.activation}), "
                f"not at the critical point {hp} ({cp.activation.name})")
    si = cp.activation.scale_invariant
    curves = []
    for p in profiles:
        L = p.depths.astype(float)
        kL = cp.kappa * L
        x = p.rho0 * kL ** 2 if si else omega * p.rho0 * kL
        y = p.theta / (cp.q_star * L)
        curves.append(Curve(f"rho0={p.rho0:.3g}", x, y, L))
    col = ScalingCollapse(curves, meta={"ansatz": "ntk", "scale_invariant": si})
    col.quality = collapse_quality(col, l_window=L_window, allow_single=True)
    return col


def favorable_depth_range(rho_min: float, rho_max: float, omega: float, kappa: float):
    """Depth interval [0.1 / (omega rho_max kappa), 10 / (omega rho_min kappa)].

    Outside it the kernel entries for the closest and farthest input pairs
    sit in the same asymptotic regime.  The bounds are loose by design.
    """
    if not rho_min > 0:
        raise DomainError("rho_min must be positive (identical inputs carry no depth scale)")
    if rho_max < rho_min:
        raise DomainError("rho_max must be >= rho_min")
    if not (omega > 0 and kappa > 0):
        raise DomainError("omega and kappa must be positive")
    return 0.1 / (omega * rho_max * kappa), 10.0 / (omega * rho_min * kappa)


# ----------------------------------------------------------------- training

def solve_training_dynamics(theta_train, theta_test, dy0, eta: float, n_samples: int | None = None,
                            t_grid=None, y_test0=None) -> TrainingDynamics:
    """Exact solution of d dy/dt = -(2 eta / N) Theta dy and the matching test outputs.

    ``theta_test`` holds the test rows (M x N) or is None.  ``y_test0``
    defaults to zeros, so the returned test outputs are then the change
    from initialisation.
    """
    A = theta_train.entries if isinstance(theta_train, NTKMatrix) else np.asarray(theta_train, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("train kernel must be square")
    if not np.allclose(A, A.T, rtol=1e-12, atol=1e-12 * max(1.0, float(np.max(np.abs(A))))):
        raise DomainError("train kernel is not symmetric")
    if not eta > 0:
        raise DomainError("learning rate must be positive")
    N = A.shape[0]
    n_samples = N if n_samples is None else int(n_samples)
    if n_samples <= 0:
        raise DomainError("sample count must be positive")
    dy0 = np.asarray(dy0, dtype=float).ravel()
    if dy0.size != N:
        raise DomainError(f"dy0 has {dy0.size} entries, kernel is {N}x{N}")
    t = np.asarray(t_grid if t_grid is not None else np.linspace(0.0, 1.0, 11), dtype=float)

    lam, V = np.linalg.eigh(0.5 * (A + A.T))
    lam = np.where(np.abs(lam) < PSD_TOL * max(1.0, float(np.trace(A))), 0.0, lam)
    rate = 2.0 * eta / n_samples
    proj = V.T @ dy0
    decay = np.exp(-rate * np.outer(t, lam))           # (T, N)
    residuals = (decay * proj) @ V.T

    test = None
    if theta_test is not None:
        B = np.atleast_2d(np.asarray(theta_test, dtype=float))
        if B.shape[1] != N:
            raise DomainError(f"test rows have {B.shape[1]} columns, expected {N}")
        # integral_0^t rate * exp(-rate lam s) ds
        with np.errstate(divide="ignore", invalid="ignore"):
            integ = np.where(lam > 0, -np.expm1(-rate * np.outer(t, lam)) / np.where(lam > 0, lam, 1.0),
                             rate * t[:, None])
        y0 = np.zeros(B.shape[0]) if y_test0 is None else np.asarray(y_test0, dtype=float).ravel()
        test = y0[None, :] - ((integ * proj) @ V.T) @ B.T
    return TrainingDynamics(float(eta), n_samples, t, residuals, test)
