"""Reproducible substream random numbers for the simulator.

Each Monte Carlo replicate owns an independent generator state derived
from (seed, stream index) alone, so results never depend on thread
scheduling: replicate r draws the same sequence whether it runs first,
last, or concurrently with others.

The generator is xoshiro256++ with splitmix64 state derivation, small
enough to live inside compiled kernels.  ReferenceXoshiro is a plain
Python mirror used to pin the compiled sequences in tests.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U17 = np.uint64(17)
_U23 = np.uint64(23)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U45 = np.uint64(45)
_U64 = np.uint64(64)
_U11 = np.uint64(11)
_ONE = np.uint64(1)
_DOUBLE_SCALE = 1.0 / 9007199254740992.0  # 2^-53


@njit(inline="always")
def _splitmix_next(z):
    z = z + _GOLDEN
    x = z
    x = (x ^ (x >> _U30)) * _MIX1
    x = (x ^ (x >> _U27)) * _MIX2
    x = x ^ (x >> _U31)
    return x, z


@njit(inline="always")
def init_state(seed, stream, state):
    """Fill a length-4 uint64 state for substream `stream` of `seed`."""
    z = seed + _GOLDEN * (stream + _ONE)
    a, z = _splitmix_next(z)
    b, z = _splitmix_next(z)
    c, z = _splitmix_next(z)
    d, z = _splitmix_next(z)
    state[0] = a
    state[1] = b
    state[2] = c
    state[3] = d
    if state[0] == np.uint64(0) and state[1] == np.uint64(0) and state[2] == np.uint64(0) and state[3] == np.uint64(0):
        state[0] = _ONE


@njit(inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


@njit(inline="always")
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s0 + s3, _U23) + s0
    t = s1 << _U17
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = _rotl(s3, _U45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(inline="always")
def next_double(state):
    """Uniform double in [0, 1)."""
    return (next_u64(state) >> _U11) * _DOUBLE_SCALE


@njit(inline="always")
def next_exponential(state, mean):
    return -math.log(1.0 - next_double(state)) * mean


@njit(inline="always")
def next_normal_pair(state):
    """Two independent standard normals (Marsaglia polar method)."""
    while True:
        a = 2.0 * next_double(state) - 1.0
        b = 2.0 * next_double(state) - 1.0
        s = a * a + b * b
        if 0.0 < s < 1.0:
            f = math.sqrt(-2.0 * math.log(s) / s)
            return a * f, b * f


_MASK = (1 << 64) - 1


class ReferenceXoshiro:
    """Pure-Python mirror of the compiled generator, for testing."""

    def __init__(self, seed: int, stream: int):
        z = (seed + 0x9E3779B97F4A7C15 * (stream + 1)) & _MASK
        s = []
        for _ in range(4):
            z = (z + 0x9E3779B97F4A7C15) & _MASK
            x = z
            x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
            x ^= x >> 31
            s.append(x)
        if not any(s):
            s[0] = 1
        self.s = s

    @staticmethod
    def _rotl(x: int, k: int) -> int:
        return ((x << k) | (x >> (64 - k))) & _MASK

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (self._rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = self._rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def next_exponential(self, mean: float) -> float:
        return -math.log(1.0 - self.next_double()) * mean

    def next_normal_pair(self):
        while True:
            a = 2.0 * self.next_double() - 1.0
            b = 2.0 * self.next_double() - 1.0
            s = a * a + b * b
            if 0.0 < s < 1.0:
                f = math.sqrt(-2.0 * math.log(s) / s)
                return a * f, b * f
