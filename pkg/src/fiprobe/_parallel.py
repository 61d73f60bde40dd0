"""Ordered parallel map over per-task work items.

Results are always reduced in task-index order and every task derives its own
RNG stream, so outputs are identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

__all__ = ["map_ordered"]


def map_ordered(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Apply fn over items, preserving order; fork out when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
