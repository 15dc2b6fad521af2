"""Deterministic random-stream derivation.

Every stochastic component draws from its own substream keyed by a root seed
plus a tuple of integer tags. Work units (resampling replicates, Monte Carlo
blocks, dataset replicates) therefore produce identical numbers no matter how
they are scheduled across workers.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream of ``seed`` addressed by ``key``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def derive_seed(seed: int, *key: int) -> int:
    """Integer seed for a child component, derived from ``seed`` and ``key``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
