import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import itertools

import numpy as np
import pytest

from gf2core.gf2core import (
    Gf2Matrix,
    LevelVector,
    mat_vec_mul,
    pack_rows,
    packed_rank,
    rank,
    rank_rows,
    shift_truncate_block,
    solve,
)
from utils.seeding import stream


def naive_rank(m: Gf2Matrix) -> int:
    span = {0}
    for r in m.row_ints():
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def test_rank_examples():
    assert rank(Gf2Matrix.identity(3)) == 3
    assert rank(Gf2Matrix.zeros(4, 2)) == 0
    assert rank(Gf2Matrix.from_rows(["110", "011", "101"])) == 2


def test_rank_empty_matrices():
    assert rank(Gf2Matrix.zeros(0, 0)) == 0
    assert rank(Gf2Matrix.zeros(0, 5)) == 0
    assert rank(Gf2Matrix.zeros(3, 0)) == 0


def test_rank_matches_span_oracle_up_to_4x4():
    rng = stream(11, "rank-oracle")
    for _ in range(300):
        rows, cols = rng.integers(0, 5, size=2)
        m = Gf2Matrix.from_array(rng.integers(0, 2, size=(rows, cols)))
        assert rank(m) == naive_rank(m)
        assert 0 <= rank(m) <= min(rows, cols)


def test_rank_invariant_under_permutation():
    rng = stream(3, "perm")
    for _ in range(50):
        a = rng.integers(0, 2, size=(5, 6))
        base = rank(Gf2Matrix.from_array(a))
        permuted = a[rng.permutation(5)][:, rng.permutation(6)]
        assert rank(Gf2Matrix.from_array(permuted)) == base


def test_mat_vec_mul_examples():
    x = LevelVector.from_string("101")
    assert str(mat_vec_mul(Gf2Matrix.identity(3), x)) == "101"
    assert str(mat_vec_mul(Gf2Matrix.zeros(2, 3), LevelVector.from_string("111"))) == "00"
    assert str(mat_vec_mul(Gf2Matrix.from_rows(["110", "011"]), x)) == "11"


def test_mat_vec_mul_dimension_mismatch():
    with pytest.raises(ValueError, match="2x3"):
        mat_vec_mul(Gf2Matrix.zeros(2, 3), LevelVector.from_string("11"))


def test_mat_vec_mul_is_linear():
    rng = stream(5, "linear")
    for _ in range(50):
        m = Gf2Matrix.from_array(rng.integers(0, 2, size=(4, 5)))
        a = LevelVector(tuple(rng.integers(0, 2, size=5)))
        b = LevelVector(tuple(rng.integers(0, 2, size=5)))
        assert mat_vec_mul(m, a ^ b) == mat_vec_mul(m, a) ^ mat_vec_mul(m, b)


def test_empty_product():
    assert mat_vec_mul(Gf2Matrix.zeros(0, 0), LevelVector()).length == 0


def test_shift_truncate_examples():
    assert shift_truncate_block(2, 2, 2) == Gf2Matrix.identity(2)
    assert shift_truncate_block(2, 0, 2) == Gf2Matrix.zeros(2, 2)
    assert shift_truncate_block(2, 1, 2) == Gf2Matrix.from_rows(["00", "10"])


def test_shift_truncate_rejects_bad_levels():
    with pytest.raises(ValueError):
        shift_truncate_block(2, 3, 3)
    with pytest.raises(ValueError):
        shift_truncate_block(3, 2, 1)


def test_block_rank_properties():
    for l, m_hat in itertools.product(range(0, 5), range(0, 6)):
        for m in range(0, min(l, m_hat) + 1):
            assert rank(shift_truncate_block(l, m, m_hat)) == m
    for l1, l2 in itertools.product(range(1, 4), repeat=2):
        for m1, m2 in itertools.product(range(l1 + 1), range(l2 + 1)):
            m_hat = max(m1, m2)
            a = shift_truncate_block(l1, m1, m_hat)
            b = shift_truncate_block(l2, m2, m_hat)
            assert rank(a.hstack(b)) == m_hat
            assert rank(Gf2Matrix.block_diag(a, b)) == m1 + m2


def test_packed_rank_matches_bitset_rank():
    rng = stream(8, "packed")
    for rows, cols in [(3, 70), (130, 90), (40, 200), (0, 10)]:
        a = rng.integers(0, 2, size=(rows, cols)).astype(np.uint8)
        expected = rank(Gf2Matrix.from_array(a)) if rows else 0
        assert packed_rank(pack_rows(a), cols) == expected
    a = rng.integers(0, 2, size=(100, 80)).astype(np.uint8)
    assert packed_rank(pack_rows(a), 80, stop_at=10) == 10


def test_solve_unique_and_ambiguous():
    rng = stream(9, "solve")
    a = rng.integers(0, 2, size=(150, 100)).astype(np.uint8)
    x = rng.integers(0, 2, size=100).astype(np.uint8)
    y = (a.astype(np.int64) @ x) % 2
    sol = solve(a, y)
    assert sol.consistent
    if sol.nullity == 0:
        assert np.array_equal(sol.solution, x)

    under = a[:60]
    sol = solve(under, y[:60])
    assert sol.consistent and sol.nullity >= 40 and not sol.unique
    assert np.array_equal((under.astype(np.int64) @ sol.solution) % 2, y[:60])


def test_solve_detects_inconsistency():
    a = np.array([[1, 0], [1, 0]], dtype=np.uint8)
    sol = solve(a, np.array([0, 1]))
    assert not sol.consistent and sol.solution is None
