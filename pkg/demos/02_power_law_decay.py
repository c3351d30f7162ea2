"""At criticality correlations between two inputs decay as a power law.

The infinite-width order parameter rho = 1 - c falls like 1/(kappa l) at
the critical point, and off criticality the curves of every smooth
activation collapse once depth and rho are rescaled by the metric factors.
"""
import numpy as np

from criticalnets import Hyperparameters, critical_point, get_activation, meanfield_trace
from criticalnets import scaling as sc
from criticalnets.experiments import offcritical_traces
from criticalnets.ntk import pair_with_distance

x1, x2 = pair_with_distance(0.5, 10, 1.0)
for name in ("tanh", "erf", "sin"):
    h = get_activation(name)
    cp = critical_point(h, 0.3)
    tr = meanfield_trace(x1, x2, h, Hyperparameters(cp.sigma_w, 0.3), 3000)
    l = np.array([10, 100, 1000, 3000])
    print(f"{name:5s} rho * kappa * l at l = {l.tolist()}: {np.round(tr.rho[l - 1] * cp.kappa * l, 4)}")

print("\noff-critical collapse with fixed zeta * tau (window l > 100):")
curves = []
for name in ("tanh", "erf", "sin"):
    cp, traces, taus = offcritical_traces(name, n_layers=2000)
    col = sc.rescale_offcritical(traces, sc.MEANFIELD, cp.kappa, cp.zeta, taus, [f"{name} {t:+.1e}" for t in taus])
    print(f"  {name:5s} collapse quality {sc.collapse_quality(col, l_window=(100, 2000)):.2e}")
    curves += col.curves
pooled = sc.ScalingCollapse(curves)
print(f"  pooled collapse quality {sc.collapse_quality(pooled, l_window=(100, 2000)):.2e}")
