"""Seeded random streams.

Every random draw in the package comes from a ``numpy.random.Generator``
backed by PCG64 and built by :func:`make_rng`; there is no module-level RNG
state.  Replica ``r`` of an experiment seeded with ``seed`` uses the stream
``seed XOR splitmix64(r)`` (64-bit), see :func:`replica_seed`.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finaliser (Steele, Lea & Flood 2014)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def replica_seed(seed: int, replica: int) -> int:
    return (int(seed) & MASK64) ^ splitmix64(int(replica))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def draw_colors(rng: np.random.Generator, probabilities: np.ndarray, size) -> np.ndarray:
    """Inverse-CDF colour draws in alphabet order."""
    cdf = np.cumsum(probabilities)
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, len(probabilities) - 1).astype(np.int64)
