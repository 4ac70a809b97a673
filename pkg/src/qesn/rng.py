"""Seed derivation.

Every random quantity is drawn from a stream keyed by ``(seed, *path)`` via
:class:`numpy.random.SeedSequence` spawn keys, so values never depend on the
order in which jobs or ensemble members are processed.
"""

from __future__ import annotations

import numpy as np

# spawn-key tags, one per consumer
BRANCH = 0
SHOTS = 1
RESET = 2
INPUT = 3
TASK = 4
RESERVOIR = 5


def stream(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path)))


def derive_seed(seed: int, *path: int) -> int:
    """A non-negative 63-bit child seed."""
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path)).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


def member_stream(master_seed: int, tag: int, member: int) -> np.random.Generator:
    return stream(master_seed, tag, member)
