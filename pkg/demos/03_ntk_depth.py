"""The neural tangent kernel forgets input distances with depth.

For identical inputs the critical NTK grows as q* (L + 1); for distinct
inputs it settles at one third of that once omega rho0 kappa L is large,
so very deep kernels cannot tell inputs apart.
"""
from criticalnets import critical_point, get_activation
from criticalnets import ntk
from criticalnets.metric_factors import omega

cp = critical_point(get_activation("erf"), 0.3)
n_in = 10
s = ntk.critical_input_norm(cp, n_in)
w = omega(cp.sigma_w, cp.sigma_b, cp.q_star, n_in, input_sq_norm=s)
profiles = ntk.ntk_profiles(cp, (0.0, 1e-3, 1e-1), 5000)

print("L      " + "  ".join(f"rho0={p.rho0:<6g}" for p in profiles))
for L in (1, 10, 100, 1000, 5000):
    print(f"{L:<6d} " + "  ".join(f"{p.theta[L - 1] / (cp.q_star * L):11.4f}" for p in profiles))

lo, hi = ntk.favorable_depth_range(1e-3, 1e-1, w, cp.kappa)
print(f"\ndepths where the kernel still separates rho0 in [1e-3, 1e-1]: about {lo:.0f} to {hi:.0f}")

col = ntk.ntk_collapse(profiles[1:], cp, omega=w)
print(f"collapse quality of Theta/(q* L) against omega rho0 kappa L: {col.quality:.2e}")
