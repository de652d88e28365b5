"""Deterministic worker-pool helper.

Tasks are a fixed list independent of the worker count; results are
reassembled by task index, so any scheduling produces identical output.
"""

from __future__ import annotations

import multiprocessing


def parallel_map(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(fn, tasks)
