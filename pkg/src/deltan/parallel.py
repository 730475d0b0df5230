"""Order-preserving process-pool map.

Work is always split into the same fixed-size chunks, whatever the worker
count, and partial results are merged in chunk order; outputs therefore do
not depend on how many workers ran them.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence

WORKERS_ENV = "DELTAN_WORKERS"
DEFAULT_CHUNK = 250


def worker_count(workers: Optional[int] = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def chunk_ranges(total: int, chunk: int = DEFAULT_CHUNK):
    return [(start, min(start + chunk, total)) for start in range(0, total, chunk)]


def map_ordered(func: Callable, tasks: Sequence[tuple], workers: Optional[int] = None) -> List:
    workers = worker_count(workers)
    if workers == 1 or len(tasks) <= 1:
        return [func(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        futures = [pool.submit(func, *t) for t in tasks]
        return [f.result() for f in futures]
