import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from catprep.gf2 import BitBasis, rank_gf2, vector_from_sites


def test_rank_identity():
    assert rank_gf2(np.eye(7, dtype=np.uint8)) == 7


def test_rank_dependent_rows():
    m = np.array([[1, 0, 1], [0, 1, 1], [1, 1, 0]], dtype=np.uint8)
    assert rank_gf2(m) == 2  # row3 = row1 ^ row2


def test_rank_empty():
    assert rank_gf2(np.zeros((0, 4), dtype=np.uint8)) == 0
    assert rank_gf2(np.zeros((3, 5), dtype=np.uint8)) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40), st.integers(1, 90))
def test_rank_matches_float_rank(seed, rows, cols):
    rng = np.random.default_rng(seed)
    m = (rng.random((rows, cols)) < 0.4).astype(np.uint8)
    # oracle: build an integer row-reduction independently
    basis = BitBasis()
    expected = 0
    for r in m:
        if basis.add(vector_from_sites(np.nonzero(r)[0])):
            expected += 1
    assert rank_gf2(m) == expected


def test_rank_wide_matrix_crossing_word_boundary():
    rng = np.random.default_rng(3)
    m = (rng.random((30, 130)) < 0.5).astype(np.uint8)
    stacked = np.concatenate([m, m], axis=0)
    assert rank_gf2(stacked) == rank_gf2(m)


def test_bitbasis_membership():
    b = BitBasis()
    assert b.add(0b101)
    assert b.add(0b011)
    assert not b.add(0b110)  # xor of the two
    assert b.contains(0b110)
    assert not b.contains(0b001)
    assert b.rank == 2
