"""
Portable 64-bit random number generator.

The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state
filled from four consecutive outputs of splitmix64 applied to the 64-bit
seed. Derived quantities are specified bit-exactly so that any
reimplementation can reproduce a trace:

* ``random()``: ``(next_u64() >> 11) * 2**-53``, in [0, 1).
* ``randint(lo, hi)``: unbiased rejection sampling. With
  ``span = hi - lo + 1`` and ``limit = 2**64 - (2**64 % span)``, draw
  ``x = next_u64()`` until ``x < limit`` and return ``lo + x % span``.
* ``exponential(mean)``: ``-mean * log1p(-random())``.
* ``child(tag)``: a new generator seeded with
  ``splitmix64_mix(seed ^ splitmix64_mix(tag))``, for independent streams.

Test vectors (see ``tests/test_rng.py``): splitmix64 seeded with 0 yields
``0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F``; xoshiro256**
with state ``(1, 2, 3, 4)`` yields ``11520, 0, 1509978240,
1215971899390074240``.
"""

from __future__ import annotations

import math
from typing import List, Sequence, TypeVar

__all__ = ["MASK64", "splitmix64", "splitmix64_mix", "Xoshiro256StarStar", "Rng"]

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def splitmix64_mix(z: int) -> int:
    """The splitmix64 finalizer applied to an already-incremented state."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, n: int) -> List[int]:
    """First ``n`` outputs of splitmix64 started at ``seed``."""
    state = seed & MASK64
    out = []
    for _ in range(n):
        state = (state + _GOLDEN) & MASK64
        out.append(splitmix64_mix(state))
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    def __init__(self, state: Sequence[int]):
        if len(state) != 4 or not any(state):
            raise ValueError("xoshiro256** needs four words, not all zero")
        self.s = [w & MASK64 for w in state]

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result


class Rng:
    """Seeded generator used for every random draw in a simulation."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._gen = Xoshiro256StarStar(splitmix64(self.seed, 4))

    def next_u64(self) -> int:
        return self._gen.next_u64()

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer on the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        if span > MASK64:
            raise ValueError("range wider than 64 bits")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            x = self.next_u64()
            if x < limit:
                return lo + x % span

    def exponential(self, mean: float) -> float:
        return -mean * math.log1p(-self.random())

    def choice(self, items: Sequence[T]) -> T:
        return items[self.randint(0, len(items) - 1)]

    def child(self, tag: int) -> "Rng":
        return Rng(splitmix64_mix(self.seed ^ splitmix64_mix(tag & MASK64)))
