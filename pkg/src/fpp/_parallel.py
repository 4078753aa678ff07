"""Replicate-level process parallelism with order-preserving reassembly."""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def chunks(replicates: np.ndarray, workers: int) -> list[np.ndarray]:
    return [c for c in np.array_split(replicates, max(1, workers)) if len(c)]


def map_replicates(func, replicates: np.ndarray, workers: int, *args):
    """Apply ``func(chunk, *args)`` over contiguous replicate chunks.

    ``func`` returns a tuple of arrays whose first axis runs over the chunk;
    results are concatenated in replicate order, so the output does not
    depend on ``workers``.
    """
    parts = chunks(replicates, workers)
    if workers <= 1 or len(parts) == 1:
        results = [func(c, *args) for c in parts]
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            results = list(pool.map(func, parts, *[[a] * len(parts) for a in args]))
    return tuple(np.concatenate(cols) for cols in zip(*results))
