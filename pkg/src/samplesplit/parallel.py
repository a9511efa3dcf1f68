"""Order-preserving process pool used by the batch entry points."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

__all__ = ["ordered_map", "default_workers"]


def default_workers():
    value = os.environ.get("SAMPLESPLIT_WORKERS")
    return max(1, int(value)) if value else 1


def ordered_map(fn, jobs, workers=1):
    """``[fn(job) for job in jobs]``, optionally spread over processes.

    Results always come back in job order, so downstream reductions are
    identical for any worker count.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))
