"""SplitMix64: the deterministic RNG behind SOM training and sampling.

The generator is fully specified here so results are reproducible across
platforms and language runtimes:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2^64)
    z <- (z xor (z >> 27)) * 0x94D049BB133111EB   (mod 2^64)
    output = z xor (z >> 31)

Doubles take the top 53 bits of the output: (z >> 11) * 2**-53, uniform in
[0, 1). Shuffles are downward Fisher-Yates with index ``min(int(u*(i+1)), i)``.
The numba training kernel re-implements the same sequence bit for bit
(asserted by tests).
"""

from __future__ import annotations

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / (1 << 53)


class SplitMix64:
    """Stateful SplitMix64 stream seeded with a 64-bit integer."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_uint64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_uint64() >> 11) * _INV_2_53

    def randint(self, n: int) -> int:
        """Uniform-ish integer in [0, n) derived from one double draw."""
        k = int(self.next_double() * n)
        return n - 1 if k >= n else k

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: list, k: int) -> list:
        """First k elements of a partial Fisher-Yates pass over a copy."""
        pool = list(items)
        n = len(pool)
        if k >= n:
            return pool
        for i in range(k):
            j = i + self.randint(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
