"""Reproducible random streams.

All randomness flows through ``numpy.random.Generator`` (PCG64). Parallel or
chunked work derives child streams with ``Generator.spawn`` so results depend
only on the master seed and the chunk index, never on worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def substreams(rng, count: int) -> list[np.random.Generator]:
    return as_generator(rng).spawn(count)


def map_chunks(fn, chunks, jobs: int = 1):
    """``[fn(c) for c in chunks]``, optionally on a thread pool.

    Kernels release the GIL, so threads overlap kernel time. Output order
    always follows ``chunks``.
    """
    chunks = list(chunks)
    if jobs <= 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, chunks))
