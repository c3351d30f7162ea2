"""Order-to-chaos criticality in deep networks as an absorbing phase transition.

Mean-field signal propagation, closed-form metric factors, the NTK at
initialisation, finite-width simulation and scaling-collapse analysis.
"""
from .activations import ActivationKernel, catalogue, get_activation
from .errors import ConvergenceError, CriticalNetsError, DivergenceError, DomainError, PreconditionError
from .meanfield import Hyperparameters, MeanFieldState, MeanFieldTrace, critical_sigma_w, meanfield_trace
from .metric_factors import CriticalPoint, critical_point
from .quadrature import QuadratureRule, gauss_hermite

__version__ = "0.1.0"

__all__ = [
    "ActivationKernel", "catalogue", "get_activation",
    "ConvergenceError", "CriticalNetsError", "DivergenceError", "DomainError", "PreconditionError",
    "Hyperparameters", "MeanFieldState", "MeanFieldTrace", "critical_sigma_w", "meanfield_trace",
    "CriticalPoint", "critical_point",
    "QuadratureRule", "gauss_hermite",
    "__version__",
]
