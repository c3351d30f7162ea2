"""Finite width cuts the power-law decay short.

Monte-Carlo ensembles of critical tanh MLPs track the mean-field 1/(kappa l)
curve until l is of order n.  Beyond that the fluctuations drive the pair
into the absorbing (collapsed) state faster.  Plotting n rho against l / n
puts all widths on one curve, and a single constant mu sets its shape.
"""
import numpy as np

from criticalnets import scaling as sc
from criticalnets.experiments import finite_size_traces

widths = (25, 50, 100)
cp, traces = finite_size_traces("tanh", 0.3, widths, runs=200, seed=1)
for n, tr in zip(widths, traces):
    l = np.array([n // 2, n, 2 * n, 4 * n])
    print(f"n = {n:3d}: n * rho at l/n = 0.5, 1, 2, 4 -> {np.round(n * tr.rho_mean[l - 1], 3)}")

col = sc.rescale_finite_size(traces, widths)
print(f"collapse quality: {col.quality:.2e}")
fit = sc.fit_mu(traces[-1], cp.kappa, widths[-1])
print(f"fitted mu at n = {widths[-1]}: {fit.mu:.3f} (residual {fit.residual:.2e})")
