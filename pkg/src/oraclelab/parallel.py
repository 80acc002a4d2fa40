"""Order-preserving map over trial indices on a forked process pool."""

import multiprocessing as mp
import os

_TASK = None


def _call(i):
    return _TASK(i)


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, n: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(n-1)]``, computed on ``workers`` forked processes.

    ``fn`` may be a closure: workers inherit it through ``fork``.  Results come
    back in index order whatever the completion order.
    """
    global _TASK
    if workers <= 1 or n < 2 or "fork" not in mp.get_all_start_methods():
        return [fn(i) for i in range(n)]
    _TASK = fn
    try:
        with mp.get_context("fork").Pool(workers) as pool:
            return pool.map(_call, range(n), chunksize=max(1, n // (8 * workers)))
    finally:
        _TASK = None
