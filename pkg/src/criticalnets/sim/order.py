"""Order parameter of a propagated pair, computed from the difference vector."""
from __future__ import annotations

import numpy as np

# centred sum of squares below this means the layer output has collapsed
DEGENERATE_SS = 1e-30
# a run whose rho drops below this is treated as absorbed (difference set to zero)
ABSORB_RHO = 1e-15


def pair_rho(a: np.ndarray, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One minus the Pearson correlation of ``a`` and ``a + e`` along the last axis.

    Working from the difference ``e`` keeps full relative precision when the
    two vectors are nearly identical: with ``s`` the sine of the angle
    between the centred vectors, ``rho = s^2 / (1 + cos)``.

    Returns ``(rho, degenerate)`` where ``degenerate`` flags slices with a
    centred sum of squares below 1e-30 in either vector (rho reported as 0).
    """
    a = np.asarray(a, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    ac = a - a.mean(axis=-1, keepdims=True)
    ec = e - e.mean(axis=-1, keepdims=True)
    bc = ac + ec
    aa = np.einsum("...i,...i->...", ac, ac)
    bb = np.einsum("...i,...i->...", bc, bc)
    degenerate = (aa < DEGENERATE_SS) | (bb < DEGENERATE_SS)
    aa_s = np.where(degenerate, 1.0, aa)
    bb_s = np.where(degenerate, 1.0, bb)
    cos = np.einsum("...i,...i->...", ac, bc) / np.sqrt(aa_s * bb_s)
    proj = np.einsum("...i,...i->...", ec, ac) / aa_s
    ep = ec - proj[..., None] * ac
    s2 = np.einsum("...i,...i->...", ep, ep) / bb_s
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.where(cos > 0.0, s2 / (1.0 + cos), 1.0 - cos)
    rho = np.clip(np.where(degenerate, 0.0, rho), 0.0, 2.0)
    return rho, degenerate
