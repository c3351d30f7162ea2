"""Configuration and result types for the finite-width simulations."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..activations import ActivationKernel, get_activation
from ..errors import DomainError
from ..meanfield import Hyperparameters

ARCHITECTURES = ("mlp", "conv1d", "conv2d")
THREADS_ENV = "CRITICALNETS_THREADS"


@dataclass(frozen=True)
class NetworkConfig:
    """A finite network.  ``width`` is the unit count (mlp) or the spatial extent (conv).

    The activation is stored by name so configs pickle cleanly into worker
    processes; :attr:`kernel` resolves it.
    """

    architecture: str
    width: int
    depth: int
    activation: str
    sigma_w: float
    sigma_b: float = 0.0
    leak: float = 0.0
    channels: int = 1
    kernel_size: int = 1
    n_in: int = 0
    dtype: str = "float64"

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise DomainError(f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}")
        for name in ("width", "depth", "channels", "kernel_size"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive")
        if self.architecture == "mlp":
            if self.n_in < 1:
                raise DomainError("an mlp needs n_in >= 1")
        else:
            if self.kernel_size % 2 == 0:
                raise DomainError(f"kernel size must be odd, got {self.kernel_size}")
            if self.kernel_size > self.width:
                raise DomainError("kernel size cannot exceed the spatial extent")
        if self.dtype not in ("float64", "float32"):
            raise DomainError("dtype must be float64 or float32")
        Hyperparameters(self.sigma_w, self.sigma_b)
        get_activation(self.activation, self.leak or None)

    @property
    def kernel(self) -> ActivationKernel:
        return get_activation(self.activation, self.leak or None)

    @property
    def hp(self) -> Hyperparameters:
        return Hyperparameters(self.sigma_w, self.sigma_b)

    @property
    def spatial_dims(self) -> int:
        return {"mlp": 0, "conv1d": 1, "conv2d": 2}[self.architecture]

    def replace(self, **kw) -> "NetworkConfig":
        d = asdict(self)
        d.update(kw)
        return NetworkConfig(**d)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EnsembleSpec:
    """Independent runs grouped into fixed blocks of lanes.

    Run ``i`` is lane ``i % block_size`` of block ``i // block_size``; the
    random stream of a block at a given layer is keyed by
    ``(seed, block, layer)`` so the result never depends on scheduling.
    """

    runs: int
    seed: int = 0
    block_size: int = 64

    def __post_init__(self):
        if self.runs < 1:
            raise DomainError("runs must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.block_size < 1:
            raise DomainError("block_size must be positive")

    @property
    def n_blocks(self) -> int:
        return -(-self.runs // self.block_size)

    def block_lanes(self, block: int) -> int:
        return min(self.block_size, self.runs - block * self.block_size)

    def run_key(self, run: int) -> tuple[int, int, int]:
        """(seed, block, lane) identifying run ``run``; distinct for distinct runs."""
        if not 0 <= run < self.runs:
            raise DomainError(f"run index {run} out of range")
        return self.seed, run // self.block_size, run % self.block_size


@dataclass
class PropagationTrace:
    """Ensemble mean of rho per layer, layers numbered from 1."""

    rho_mean: np.ndarray
    rho_stderr: np.ndarray
    config: NetworkConfig
    ensemble: EnsembleSpec
    survival: Optional[np.ndarray] = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rho_mean = np.asarray(self.rho_mean, dtype=float)
        self.rho_stderr = np.asarray(self.rho_stderr, dtype=float)
        if self.rho_mean.shape != self.rho_stderr.shape:
            raise DomainError("mean and stderr must have the same length")
        if np.any(self.rho_stderr < 0):
            raise DomainError("standard errors must be non-negative")

    @property
    def layers(self) -> np.ndarray:
        return np.arange(1, len(self.rho_mean) + 1)

    @property
    def rho(self) -> np.ndarray:
        return self.rho_mean

    def __len__(self):
        return len(self.rho_mean)


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)
