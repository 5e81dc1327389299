"""Worker pool for chunked, order-preserving batch work.

Chunk boundaries never depend on the worker count, so results are identical
for any ``--threads`` value.  BLAS is pinned to one thread inside the pool.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from threadpoolctl import threadpool_limits

_workers = 1


def set_workers(n: int) -> None:
    global _workers
    _workers = max(1, int(n))


def get_workers() -> int:
    return _workers


@contextmanager
def workers(n: int):
    old = _workers
    set_workers(n)
    try:
        yield
    finally:
        set_workers(old)


def map_chunks(fn, n_items: int, chunk: int = 512) -> list:
    """Apply ``fn(start, stop)`` over fixed chunks of ``range(n_items)``; ordered results."""
    bounds = [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]
    with threadpool_limits(limits=1):
        if _workers == 1 or len(bounds) <= 1:
            return [fn(a, b) for a, b in bounds]
        with ThreadPoolExecutor(max_workers=_workers) as pool:
            return list(pool.map(lambda ab: fn(*ab), bounds))
