"""Deterministic 64-bit PRNG (SplitMix64) and sampling helpers.

Every stochastic step in the pipeline (train/test shuffling, bootstrap
resampling, per-node feature sampling) draws from this generator, so a run
is reproducible from a single 64-bit seed independent of platform or
library versions.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea and Flood, 2014)."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        span = 1 << 64
        threshold = span - span % n
        while True:
            u = self.next_u64()
            if u < threshold:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n) via partial Fisher-Yates."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def bootstrap_indices(self, n: int) -> list[int]:
        """n indices drawn with replacement from range(n)."""
        return [self.below(n) for _ in range(n)]


def spawn_seed(seed: int, index: int) -> int:
    """Child seed for stream `index`.

    Equals the (index+1)-th raw output of SplitMix64(seed), computed in
    closed form so parallel consumers can derive disjoint streams without
    sequencing through the parent.
    """
    return _mix((seed + (index + 1) * _GOLDEN) & _MASK64)
