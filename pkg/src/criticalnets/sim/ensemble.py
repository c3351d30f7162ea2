"""Random streams, block scheduling and ordered reduction for ensembles."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .config import EnsembleSpec, default_workers


def layer_generator(seed: int, block: int, layer: int) -> np.random.Generator:
    """Philox stream keyed by (seed, block, layer)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block, layer))))


def map_blocks(fn: Callable, ensemble: EnsembleSpec, args: tuple = (), workers: int | None = None) -> list:
    """``[fn(block, lanes, *args) for block in range(n_blocks)]``, optionally in worker processes.

    Results come back in block order whatever the schedule.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(b, ensemble.block_lanes(b)) for b in range(ensemble.n_blocks)]
    if workers == 1 or len(jobs) == 1:
        return [fn(b, lanes, *args) for b, lanes in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, b, lanes, *args) for b, lanes in jobs]
        return [f.result() for f in futures]


class Moments:
    """Per-layer count/mean/M2, merged block by block in a fixed order."""

    def __init__(self, length: int):
        self.n = 0
        self.mean = np.zeros(length)
        self.m2 = np.zeros(length)

    def add_block(self, values: np.ndarray):
        """``values`` has shape (lanes, length)."""
        k = values.shape[0]
        if k == 0:
            return
        bm = values.mean(axis=0)
        bm2 = ((values - bm) ** 2).sum(axis=0)
        n = self.n + k
        delta = bm - self.mean
        self.mean = self.mean + delta * (k / n)
        self.m2 = self.m2 + bm2 + delta * delta * (self.n * k / n)
        self.n = n

    def stderr(self) -> np.ndarray:
        if self.n < 2:
            return np.zeros_like(self.mean)
        return np.sqrt(np.maximum(self.m2, 0.0) / (self.n - 1) / self.n)


def reduce_blocks(blocks: Sequence[np.ndarray], length: int) -> tuple[np.ndarray, np.ndarray]:
    m = Moments(length)
    for v in blocks:
        m.add_block(np.asarray(v, dtype=float))
    return m.mean, m.stderr()
