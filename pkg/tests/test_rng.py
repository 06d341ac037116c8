import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from skq.parallel import map_chunks
from skq.rng import raw_blocks, uniform_block


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 500), st.integers(1, 300))
def test_blocks_do_not_depend_on_chunking(seed, start, count):
    whole = raw_blocks(seed, 0, start + count)
    assert np.array_equal(raw_blocks(seed, start, count), whole[start:])


def test_rounds_are_independent_streams():
    a = uniform_block(3, 0, 100, 4, round_=0)
    b = uniform_block(3, 0, 100, 4, round_=1)
    assert not np.any(a == b)


def test_uniform_range_and_moments():
    u = uniform_block(0, 0, 200_000, 2)
    assert u.min() >= 0 and u.max() < 1
    assert np.all(np.abs(u.mean(axis=0) - 0.5) < 3 * np.sqrt(1 / 12 / len(u)))


def test_map_chunks_is_order_preserving():
    items = np.arange(10_001.0)
    for threads in (1, 4):
        out = map_chunks(lambda x: x**2, items, threads=threads, chunk=999)
        assert np.array_equal(out, items**2)
    a, b = map_chunks(lambda x: (x, -x), items, threads=2, chunk=1000)
    assert np.array_equal(b, -items)
