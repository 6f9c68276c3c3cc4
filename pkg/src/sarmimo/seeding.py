"""Deterministic seed derivation for parallel Monte-Carlo experiments.

Every stochastic task (chip realization, trial, evaluation stream) gets
its generator from ``derive_seed(master_seed, *indices)`` so results are
reproducible and independent of worker scheduling: the derived seed
depends only on the master seed and the task's indices, never on
execution order.

The mixing function is the splitmix64 finalizer; indices are folded in
one at a time with a golden-ratio offset.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "mix64"]

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer: a 64-bit bijective avalanche mix."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *indices: int) -> int:
    """Fold task indices into the master seed, one mix round per index."""
    state = mix64(int(master_seed))
    for ix in indices:
        state = mix64(state ^ ((int(ix) + 1) * _GOLDEN64 & _MASK64))
    return state


def generator_for(master_seed: int, *indices: int) -> np.random.Generator:
    """A fresh PCG64 generator for the task identified by ``indices``."""
    return np.random.default_rng(derive_seed(master_seed, *indices))
