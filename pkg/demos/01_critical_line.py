"""Where is the edge of chaos, and what sets the speed of the dynamics there?

Walks the order-to-chaos boundary of a tanh network, prints the metric
factors at each point, and checks the phase labels on either side.
"""
import numpy as np

from criticalnets import Hyperparameters, critical_point, get_activation
from criticalnets import meanfield as mf

tanh = get_activation("tanh")

print("sigma_b   sigma_w;c   q*        kappa     zeta      alpha")
for sb in (0.1, 0.2, 0.3, 0.4, 0.5):
    cp = critical_point(tanh, sb)
    print(f"{sb:7.2f}   {cp.sigma_w:.6f}   {cp.q_star:.5f}   {cp.kappa:.5f}   {cp.zeta:.5f}   {cp.alpha:.5f}")

cp = critical_point(tanh, 0.3)
for dsw in (-0.05, 0.0, 0.05):
    hp = Hyperparameters(cp.sigma_w + dsw, 0.3)
    lam = mf.lyapunov_cmap(tanh, hp)
    print(f"sigma_w = {hp.sigma_w:.4f}: lambda_C = {lam:+.3e} -> {mf.phase_of(hp, tanh)}")

# the lambda_C = 0 contour on a coarse grid matches the critical line above
sw = np.linspace(1.1, 1.8, 8)
sb = np.array([0.1, 0.3, 0.5])
lam = mf.phase_diagram(tanh, sw, sb)
print("\nsign of lambda_C (rows sigma_b, columns sigma_w):")
for s, row in zip(sb, lam):
    print(f"{s:4.1f} " + " ".join("+" if v > 0 else "-" for v in row))

relu = critical_point(get_activation("relu"), 0.0)
print(f"\nReLU critical point: sigma_w = {relu.sigma_w:.6f}, kappa = {relu.kappa:.6f}")
