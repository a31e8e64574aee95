"""Seed derivation and random generator construction.

All randomness in the library flows through Philox generators keyed by a
base seed plus an index path, so any draw can be reproduced from the seed
printed in an output row. Philox is counter-based and produces identical
streams across platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_rng(base_seed: int, *path: int) -> np.random.Generator:
    """Generator for (base_seed, path); same arguments, same stream."""
    ss = np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1),
                                spawn_key=tuple(int(i) for i in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(base_seed: int, *path: int) -> int:
    """Collapse (base_seed, path) into a single 64-bit sub-seed."""
    ss = np.random.SeedSequence(entropy=int(base_seed) & (2**64 - 1),
                                spawn_key=tuple(int(i) for i in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def array_hash(a: np.ndarray) -> str:
    """Short stable content hash, used to log which draws a routine saw."""
    h = hashlib.sha256(np.ascontiguousarray(a, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]
