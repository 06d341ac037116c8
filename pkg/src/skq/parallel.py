"""Deterministic chunked evaluation over a leading batch axis."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def map_chunks(fn, items, threads: int = 1, chunk: int = 4096):
    """Apply ``fn`` to contiguous slices of ``items`` and concatenate in order.

    ``fn`` must act element-wise along axis 0 so results do not depend on the
    chunk boundaries or on ``threads``.
    """
    n = len(items)
    if n == 0:
        return fn(items)
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if threads <= 1 or len(bounds) == 1:
        parts = [fn(items[a:b]) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: fn(items[ab[0] : ab[1]]), bounds))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p, axis=0) for p in zip(*parts))
    return np.concatenate(parts, axis=0)
