"""Order-preserving map over a process pool."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_THREADS = "DISCRETE_EXTREMES_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Resolve a worker count: explicit request, else the environment
    variable (0 = one per CPU), else 1."""
    if requested is None:
        raw = os.environ.get(ENV_THREADS, "").strip()
        if not raw:
            return 1
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError("worker count must be non-negative")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def parallel_map(fn, items, workers: int | None = None) -> list:
    items = list(items)
    n = min(worker_count(workers), len(items)) if items else 1
    if n <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * n))))
