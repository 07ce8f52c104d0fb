"""Deterministic random streams.

All randomness in the package flows through the counter-based Philox
bit generator, keyed by ``numpy.random.SeedSequence(seed, spawn_key)``.
Streams are therefore reproducible bit-for-bit for a fixed numpy version
and independent of scheduling: replication ``r`` of an experiment always
draws from the stream keyed ``(seed, namespace, ..., r)`` no matter which
worker runs it.
"""

from __future__ import annotations

import numpy as np

# Stream namespaces, one per driver that consumes randomness.
NS_STARTS = 1
NS_SAMPLE = 2
NS_TABLE1 = 3
NS_CLT = 4
NS_RATE = 5
NS_BENCH = 6
NS_CONVEXITY = 7


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the stream identified by ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse ``(seed, *key)`` into a single 63-bit integer seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
