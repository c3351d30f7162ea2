"""Monte-Carlo simulation of finite-width MLPs and convolutional networks."""
from .config import EnsembleSpec, NetworkConfig, PropagationTrace
from .conv import (CriticalScan, SpreadTrace, conv_pair_trace, measure_spread, random_inputs,
                   scan_critical_sigma_w, single_pixel_pair)
from .lyapunov import LyapunovEstimate, linear_lyapunov, lyapunov_finite
from .mlp import mlp_pair_trace, orthogonal_unit_inputs

__all__ = [
    "EnsembleSpec", "NetworkConfig", "PropagationTrace",
    "CriticalScan", "SpreadTrace", "conv_pair_trace", "measure_spread", "random_inputs",
    "scan_critical_sigma_w", "single_pixel_pair",
    "LyapunovEstimate", "linear_lyapunov", "lyapunov_finite",
    "mlp_pair_trace", "orthogonal_unit_inputs",
]
