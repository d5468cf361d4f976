"""Deterministic pseudo-random numbers for reproducible runs.

The generator is xorshift64* (Vigna, 2016): a 64-bit linear shift-register
update followed by a multiplicative scramble.  It is implemented in plain
integer arithmetic so that identical seeds give bit-identical streams on
any platform, independent of numpy's generator choices.

Streams are split by component id: ``Rng(seed, stream)`` mixes the stream
id into the seed through SplitMix64, so e.g. the two encoder weight
matrices draw from provably disjoint sequences.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


class Rng:
    """xorshift64* stream, optionally split by a component id."""

    def __init__(self, seed: int, stream: int = 0):
        s = (int(seed) & _MASK) ^ _splitmix64(int(stream) & _MASK)
        # a couple of warm-up mixes; also guards against the all-zero state
        s = _splitmix64(s)
        self._state = s if s != 0 else _GOLDEN

    def next_u64(self) -> int:
        x = self._state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK
        x ^= (x >> 27)
        self._state = x
        return (x * _MULT) & _MASK

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float, size=None):
        if size is None:
            return lo + (hi - lo) * self.random()
        n = int(np.prod(size))
        out = np.empty(n)
        for i in range(n):
            out[i] = lo + (hi - lo) * self.random()
        return out.reshape(size)

    def normal(self, size=None):
        """Standard normals via Box-Muller."""
        if size is None:
            return self._normal_pair()[0]
        n = int(np.prod(size))
        out = np.empty(n)
        i = 0
        while i < n:
            a, b = self._normal_pair()
            out[i] = a
            if i + 1 < n:
                out[i + 1] = b
            i += 2
        return out.reshape(size)

    def _normal_pair(self):
        u1 = self.random()
        while u1 <= 0.0:
            u1 = self.random()
        u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        th = 2.0 * math.pi * u2
        return r * math.cos(th), r * math.sin(th)

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        span = _MASK - (_MASK % n)
        while True:
            x = self.next_u64()
            if x < span:
                return x % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of range(n)."""
        idx = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.integer(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx
