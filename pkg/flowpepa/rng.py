# flowpepa/rng.py
"""
Seeded random numbers for simulation replicas.

The bit generator is numpy's PCG64 seeded with the replica seed, so a
(seed, network) pair produces the same trace on every platform. Uniform
variates are drawn in blocks and handed out one at a time; exponentials
use the inverse transform on the same stream.
"""

import math

import numpy as np

BLOCK = 4096


class SeededRNG:
    """One replica's random stream."""

    def __init__(self, seed: int, block: int = BLOCK) -> None:
        if seed < 0:
            raise ValueError(f"seed must be >= 0, got {seed}")
        self._seed = seed
        self._generator = np.random.Generator(np.random.PCG64(seed))
        self._block = block
        self._buffer: list[float] = []
        self._next = 0

    @property
    def seed(self) -> int:
        return self._seed

    def uniform(self) -> float:
        """Next variate in [0, 1)."""
        if self._next == len(self._buffer):
            self._buffer = self._generator.random(self._block).tolist()
            self._next = 0
        value = self._buffer[self._next]
        self._next += 1
        return value

    def exponential(self, rate: float) -> float:
        """Exponential waiting time with the given rate; inf for rate 0."""
        if rate <= 0:
            return math.inf
        return -math.log(1.0 - self.uniform()) / rate
