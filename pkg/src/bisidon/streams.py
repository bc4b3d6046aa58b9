"""Seeded random substreams.

Every random consumer in the package takes a ``numpy.random.Generator``.
Independent substreams (one per trial, per Monte-Carlo chunk, per experiment
row) are derived from a 64-bit parent seed and an index through the
SplitMix64 finalizer, which is a bijection on 64-bit words::

    z = seed + (index + 1) * 0x9E3779B97F4A7C15        (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9            (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB            (mod 2**64)
    z =  z ^ (z >> 31)

The derived word seeds a PCG64 generator. Results therefore depend only on
(seed, index), never on scheduling order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed of substream ``index`` under parent ``seed``."""
    return mix64((seed & MASK64) + (index + 1) * _GOLDEN)


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, index)))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def as_generator(rng: np.random.Generator | int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng))


def draw_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 64-bit parent seed from ``rng``."""
    return int(rng.integers(0, 1 << 64, dtype=np.uint64))
