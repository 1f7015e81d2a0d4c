from typing import Literal, Sequence

import numpy as np

from ..utils.exceptions import ArgumentError

_MAX_SEED = 2**64


class Rng:
    """Deterministic random stream backed by numpy's PCG64.

    PCG64 is the 128-bit permuted congruential generator (multiplier
    0x2360ed051fc65da44385df649fccf645, XSL-RR output) seeded through SeedSequence, so the
    stream for a given seed is identical on every platform. Independent child streams are
    derived by key (for example (epoch, sample index)) instead of by consumption order.
    """

    def __init__(self, seed: int, key: Sequence[int] = ()):
        if not 0 <= int(seed) < _MAX_SEED:
            raise ArgumentError(f"Seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def child(self, *key: int) -> "Rng":
        """An independent stream keyed by this stream's seed and key plus `key`."""
        return Rng(self.seed, self.key + tuple(key))

    def uniform(self, low: float, high: float, size=None, dtype=np.float64):
        """Uniform draws on [low, high); low == high yields the constant.

        Raises:
            ArgumentError: If high < low
        """
        if high < low:
            raise ArgumentError(f"uniform requires high >= low, got ({low}, {high})")
        values = self._generator.uniform(low, high, size)
        return values.astype(dtype) if size is not None else float(values)

    def normal(self, mu: float, sigma: float, size=None, dtype=np.float64):
        """Gaussian draws.

        Raises:
            ArgumentError: If sigma < 0
        """
        if sigma < 0:
            raise ArgumentError(f"normal requires sigma >= 0, got {sigma}")
        values = self._generator.normal(mu, sigma, size)
        return values.astype(dtype) if size is not None else float(values)

    def draw(
        self,
        distribution: Literal["uniform", "normal"],
        params: tuple[float, float],
        n: int,
    ) -> np.ndarray:
        """Draw `n` values from uniform(a, b) or normal(mu, sigma)."""
        if n < 0:
            raise ArgumentError(f"Cannot draw {n} values")
        if distribution == "uniform":
            return self.uniform(params[0], params[1], n)
        if distribution == "normal":
            return self.normal(params[0], params[1], n)
        raise ArgumentError(f"Unknown distribution '{distribution}'")

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def random(self, size) -> np.ndarray:
        return self._generator.random(size)
