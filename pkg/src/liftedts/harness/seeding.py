"""Per-run seed derivation.

A run's seed is a SplitMix64 finalizer applied to ``master_seed + run_index * GAMMA``
(mod 2**64), with

* ``GAMMA = 0x9E3779B97F4A7C15``
* ``z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9``
* ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``
* ``z = z ^ (z >> 31)``

all arithmetic modulo 2**64. The finalizer is a bijection, so distinct inputs
never collide. The result seeds ``numpy.random.default_rng``.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def splitmix64_finalize(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_run_seed(master_seed: int, run_index: int) -> int:
    if run_index < 0:
        raise ValueError("run_index must be nonnegative")
    return splitmix64_finalize(master_seed + run_index * GAMMA)


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_run_seed(master_seed, run_index))
