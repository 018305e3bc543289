import itertools
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from netcap.gf2 import (
    Gf2Matrix,
    hstack,
    int_to_bits,
    kernel_basis,
    left_inverse,
    mat_mul,
    mat_vec,
    mat_vec_many,
    rank,
    solve,
    solve_left,
    vstack,
)


def naive_rank(rows: list[list[int]]) -> int:
    # textbook elimination on lists of 0/1, independent of the bitset code
    m = [r[:] for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                m[i] = [(a + b) % 2 for a, b in zip(m[i], m[r])]
        r += 1
    return r


@st.composite
def matrices(draw, max_rows=6, max_cols=6):
    nr = draw(st.integers(0, max_rows))
    nc = draw(st.integers(0, max_cols))
    seed = draw(st.integers(0, 2**32))
    return Gf2Matrix.random(nr, nc, random.Random(seed))


def test_rank_examples():
    assert rank(Gf2Matrix.identity(3)) == 3
    assert rank(Gf2Matrix.from_text("11\n11")) == 1
    assert rank(Gf2Matrix.zeros(2, 3)) == 0


@given(matrices())
def test_rank_matches_naive(m):
    assert rank(m) == naive_rank(m.to_list())


def test_random_4x6_against_naive():
    rng = random.Random(7)
    for _ in range(50):
        m = Gf2Matrix.random(4, 6, rng)
        assert rank(m) == naive_rank(m.to_list())


def test_kernel_examples():
    assert kernel_basis(Gf2Matrix.identity(2)) == []
    assert kernel_basis(Gf2Matrix.from_text("11")) == [0b11]
    assert len(kernel_basis(Gf2Matrix.zeros(2, 3))) == 3


@given(matrices(5, 6))
def test_kernel_is_exact_nullspace(m):
    basis = kernel_basis(m)
    assert len(basis) == m.ncols - rank(m)
    span = set()
    for coeffs in itertools.product((0, 1), repeat=len(basis)):
        v = 0
        for c, b in zip(coeffs, basis):
            if c:
                v ^= b
        span.add(v)
    brute = {x for x in range(1 << m.ncols) if mat_vec(m, x) == 0}
    assert span == brute


def test_mat_vec_examples():
    assert mat_vec(Gf2Matrix.identity(3), 0b101) == 0b101
    assert mat_vec(Gf2Matrix.from_text("11"), [1, 1]) == 0


@given(matrices(), st.integers(0, 2**32))
def test_solve_round_trip(a, seed):
    x = random.Random(seed).getrandbits(a.ncols) if a.ncols else 0
    y = mat_vec(a, x)
    x2 = solve(a, y)
    assert x2 is not None and mat_vec(a, x2) == y


def test_solve_inconsistent():
    a = Gf2Matrix.from_text("1\n1")
    assert solve(a, 0b01) is None
    assert solve(a, 0b11) == 1


@given(matrices(5, 5), matrices(5, 5))
def test_mat_mul_matches_numpy(a, b):
    if a.ncols != b.nrows:
        b = Gf2Matrix.random(a.ncols, b.ncols, random.Random(b.nrows))
    expect = (a.to_numpy().astype(int) @ b.to_numpy().astype(int)) % 2
    assert np.array_equal(mat_mul(a, b).to_numpy(), expect)
    assert (a @ b) == mat_mul(a, b)


@given(matrices(6, 6))
def test_mat_vec_many_agrees(m):
    xs = np.arange(1 << m.ncols, dtype=np.uint64)
    got = mat_vec_many(m, xs)
    assert [int(v) for v in got] == [mat_vec(m, int(x)) for x in xs]


@given(matrices(5, 5))
def test_left_inverse(m):
    if rank(m) == m.ncols:
        assert left_inverse(m) @ m == Gf2Matrix.identity(m.ncols)
    else:
        with pytest.raises(ValueError):
            left_inverse(m)


def test_solve_left_examples():
    a = Gf2Matrix.from_text("10\n11")
    target = Gf2Matrix.from_text("01")
    l = solve_left(a, target)
    assert l is not None and l @ a == target
    assert solve_left(Gf2Matrix.from_text("10"), Gf2Matrix.from_text("01")) is None


@given(matrices())
def test_text_round_trip(m):
    back = Gf2Matrix.from_text(m.to_text(), m.ncols) if m.nrows else Gf2Matrix.zeros(0, m.ncols)
    if m.ncols:
        assert back == m


def test_text_format():
    m = Gf2Matrix.from_text("100\n011")
    assert m.to_list() == [[1, 0, 0], [0, 1, 1]]
    assert m[1, 2] == 1 and m[0, 1] == 0
    with pytest.raises(ValueError):
        Gf2Matrix.from_text("10\n1")
    with pytest.raises(ValueError):
        Gf2Matrix.from_text("12")


def test_stacking_and_transpose():
    a = Gf2Matrix.from_text("10\n01")
    b = Gf2Matrix.from_text("1\n1")
    h = hstack([a, b])
    assert h.to_list() == [[1, 0, 1], [0, 1, 1]]
    assert h.col_slice(2, 3) == b
    v = vstack([a, Gf2Matrix.from_text("11")])
    assert v.nrows == 3 and v.row_slice(2, 3).to_list() == [[1, 1]]
    assert h.T.T == h
    assert list(int_to_bits(0b110, 3)) == [0, 1, 1]
