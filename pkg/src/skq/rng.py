"""Counter-based random streams.

Each sample index owns one Philox block (four 64-bit words) per draw round,
so the numbers a sample receives depend only on ``(seed, round, index)`` and
never on how the index range is chunked or scheduled.
"""

from __future__ import annotations

import numpy as np

WORDS_PER_BLOCK = 4
_SCALE = 2.0**-53


def raw_blocks(seed: int, start: int, count: int, round_: int = 0):
    """uint64 array of shape (count, 4): the Philox blocks for indices start..start+count-1."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    bg = np.random.Philox(key=[seed, round_])
    if start:
        bg = bg.advance(start)
    return bg.random_raw(WORDS_PER_BLOCK * count).reshape(count, WORDS_PER_BLOCK)


def uniform_block(seed: int, start: int, count: int, dim: int, round_: int = 0):
    """Uniform doubles in [0, 1), shape (count, dim), dim <= 4."""
    if not 1 <= dim <= WORDS_PER_BLOCK:
        raise ValueError("dim must be between 1 and 4")
    words = raw_blocks(seed, start, count, round_)[:, :dim]
    return (words >> np.uint64(11)).astype(np.float64) * _SCALE
