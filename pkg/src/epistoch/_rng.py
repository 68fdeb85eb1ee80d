"""Seed handling.

Every stochastic routine takes an explicit seed. A seed is either a
nonnegative int or a tuple of them; ``(master_seed, i)`` names the i-th
replicate stream, so serial and parallel runs draw identical numbers.
"""
from __future__ import annotations

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(s) for s in seed])
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.SeedSequence(int(seed))


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for ``seed``; an existing Generator is passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(as_seed_sequence(seed)))


def replicate_seed(master_seed, index: int) -> tuple:
    if isinstance(master_seed, (tuple, list)):
        return tuple(int(s) for s in master_seed) + (int(index),)
    return (int(master_seed), int(index))
