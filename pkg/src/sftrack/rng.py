"""Deterministic 64-bit PRNG used by the synthetic sequence generator.

The generator is fully specified by its update equations so that identical
streams can be reproduced from any language. All arithmetic is modulo 2^64.

State seeding / hashing (splitmix64):

    z = (x + 0x9E3779B97F4A7C15)
    z = (z XOR (z >> 30)) * 0xBF58476D1E3557B9
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB
    out = z XOR (z >> 31)

Stream generation (xorshift64*), state s != 0:

    s = s XOR (s >> 12)
    s = s XOR (s << 25)
    s = s XOR (s >> 27)
    out = s * 0x2545F4914F6CDD1D

Uniform doubles take the top 53 bits: u = (out >> 11) * 2^-53, u in [0, 1).
Gaussians use the Box-Muller transform on consecutive uniform pairs with
u1 forced away from zero: g = sqrt(-2 ln(1-u1)) * cos(2 pi u2).

Independent streams are derived by hashing (seed, salt...) tuples with
splitmix64 folds; lattice noise hashes integer coordinates the same way.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1E3557B9
_MIX2 = 0x94D049BB133111EB
_STAR = 0x2545F4914F6CDD1D


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit stream seed."""
    h = 0
    for p in parts:
        h = splitmix64((h ^ (p & _MASK)) & _MASK)
    return h if h != 0 else _GOLDEN


class Stream:
    """xorshift64* stream with scalar draws."""

    def __init__(self, seed: int):
        self._s = derive_seed(seed)

    def next_u64(self) -> int:
        s = self._s
        s ^= (s >> 12)
        s ^= (s << 25) & _MASK
        s ^= (s >> 27)
        self._s = s
        return (s * _STAR) & _MASK

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def gauss(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)


def _mix_u64(z: np.ndarray) -> np.ndarray:
    z = (z + np.uint64(_GOLDEN)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def hash_coords(seed: int, ix: np.ndarray, iy: np.ndarray, salt: int = 0) -> np.ndarray:
    """Vectorized splitmix64 hash of integer lattice coordinates.

    Signed inputs are reinterpreted as two's-complement uint64 so negative
    world coordinates hash consistently.
    """
    ix = np.asarray(ix, dtype=np.int64).astype(np.uint64)
    iy = np.asarray(iy, dtype=np.int64).astype(np.uint64)
    h = _mix_u64(np.uint64(derive_seed(seed, salt)) ^ ix)
    h = _mix_u64(h ^ iy)
    return h
