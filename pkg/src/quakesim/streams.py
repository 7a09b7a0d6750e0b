"""Reproducible random number streams for replicated runs.

The seeding contract, part of the tool's external interface so that other
implementations can reproduce results exactly: replica i of a run with
master seed s draws from

    numpy.random.Generator(numpy.random.PCG64(
        numpy.random.SeedSequence(entropy=s, spawn_key=(i,))))

Replica streams are independent of each other and of how many replicas run
or in what order, which is what makes threaded fan-out byte-identical to
sequential execution.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "master"]

_SEED_MAX = 2**64


def master(seed: int) -> np.random.Generator:
    """Generator for single-trajectory runs with the given 64-bit seed."""
    if not 0 <= seed < _SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for replica `index` of master seed `seed`."""
    if not 0 <= seed < _SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))
