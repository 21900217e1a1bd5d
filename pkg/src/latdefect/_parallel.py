"""Thread-pool helper for embarrassingly parallel frequency sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "LATTICE_DEFECT_THREADS"


def thread_count() -> int:
    """Parallel width from ``LATTICE_DEFECT_THREADS`` (default 1)."""
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def pmap(func, items):
    """Map ``func`` over ``items`` preserving order, in parallel if requested."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
