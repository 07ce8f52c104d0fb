"""Replication-level parallelism.

Experiment replications derive their RNG stream from (seed, index), so the
result of a run is independent of how replications are scheduled. The
``GEOMED_THREADS`` environment variable caps the number of worker
processes (default: machine cores).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def thread_cap() -> int:
    raw = os.environ.get("GEOMED_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"GEOMED_THREADS must be an integer, got {raw!r}") from exc
        if value < 1:
            raise ValueError("GEOMED_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


def map_replications(fn, args_list, threads: int | None = None) -> list:
    """Map a picklable top-level function over replication argument tuples."""
    args_list = list(args_list)
    workers = min(threads if threads is not None else thread_cap(), len(args_list))
    if workers <= 1:
        return [fn(a) for a in args_list]
    chunk = max(1, len(args_list) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list, chunksize=chunk))
