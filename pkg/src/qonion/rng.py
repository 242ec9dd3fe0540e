"""Deterministic pseudo-randomness for reproducible transcripts.

The package uses SplitMix64 everywhere randomness is needed (exponent draws,
measurement sampling, attacker measurements).  The algorithm is fixed so that
a transcript is reproducible bit-for-bit from (config, seed) alone:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB   mod 2^64
    output: z XOR (z >> 31)

`random()` keeps the top 53 bits of one output; `randrange(n)` rejects the
biased tail of the 64-bit range, consuming one output per attempt.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Seedable 64-bit generator; one instance per independent stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("randrange() requires n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            z = self.next_u64()
            if z < limit:
                return z % n

    def spawn_seeds(self, count: int) -> list[int]:
        """Derive `count` independent stream seeds (used for per-shot streams)."""
        return [self.next_u64() for _ in range(count)]
