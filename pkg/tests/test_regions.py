import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netcap.fixtures import random_linear_code
from netcap.info import DistributionTable, induced_distribution
from netcap.regions import (
    DeterministicBC,
    Inequality,
    RateRegion,
    dbc_from_table,
    dbc_member_any,
    dbc_region,
    grid_distributions,
    intersect,
    mac_region_from_code,
    r_mac_vector,
    region_membership,
    shift_region,
)

F = Fraction
BITS = list(itertools.product(range(2), repeat=2))


def mac_table(f):
    rows = {(m1, m2, f(m1, m2)): F(1, 4) for m1, m2 in BITS}
    return DistributionTable((("M1", 2), ("M2", 2), ("W", 4)), rows)


def bounds(region):
    return {q.subset: q.bound for q in region.inequalities}


def test_mac_identity():
    d = mac_table(lambda a, b: a | (b << 1))
    b = bounds(mac_region_from_code(d, ["M1", "M2"], ["W"]))
    assert b[(0,)] == pytest.approx(1) and b[(1,)] == pytest.approx(1) and b[(0, 1)] == pytest.approx(2)
    assert r_mac_vector(d, ["M1", "M2"], ["W"]) == pytest.approx([1, 1])


def test_mac_xor():
    d = mac_table(lambda a, b: a ^ b)
    region = mac_region_from_code(d, ["M1", "M2"], ["W"])
    b = bounds(region)
    assert b[(0, 1)] == pytest.approx(1) and b[(0,)] == pytest.approx(1) and b[(1,)] == pytest.approx(1)
    r = r_mac_vector(d, ["M1", "M2"], ["W"])
    assert r == pytest.approx([0, 0])
    assert region_membership(region, r)


def test_mac_constant():
    d = mac_table(lambda a, b: 0)
    assert all(v == pytest.approx(0) for v in bounds(mac_region_from_code(d, ["M1", "M2"], ["W"])).values())
    assert r_mac_vector(d, ["M1", "M2"], ["W"]) == pytest.approx([0, 0])


def test_mac_rejects_dependent_messages():
    d = DistributionTable((("M1", 2), ("M2", 2), ("W", 2)), {(0, 0, 0): F(1, 2), (1, 1, 1): F(1, 2)})
    with pytest.raises(ValueError):
        mac_region_from_code(d, ["M1", "M2"], ["W"])


@given(st.integers(0, 10**6))
def test_r_mac_in_region_for_random_codes(seed):
    code = random_linear_code(random.Random(seed))
    d = induced_distribution(code)
    msgs = [f"M:{s}" for s in code.demand.sources]
    for v in code.net.nodes:
        ins = [f"W:{e.id}" for e in code.net.in_edges(v)]
        if ins:
            region = mac_region_from_code(d, msgs, ins)
            assert region_membership(region, r_mac_vector(d, msgs, ins), tol=1e-9)


def test_dbc_examples():
    same = DeterministicBC(2, ((0, 1), (0, 1)))
    b = bounds(dbc_region(same))
    assert b[(0,)] == pytest.approx(1) and b[(0, 1)] == pytest.approx(1)
    assert region_membership(dbc_region(same), [0, 0])
    split = DeterministicBC(4, ((0, 0, 1, 1), (0, 1, 0, 1)))
    b = bounds(dbc_region(split))
    assert (b[(0,)], b[(1,)], b[(0, 1)]) == pytest.approx((1, 1, 2))


def test_dbc_validation():
    with pytest.raises(ValueError):
        DeterministicBC(2, ((0,),))
    with pytest.raises(ValueError):
        DeterministicBC(2, ((0, 1),), (F(1, 2), F(1, 3)))


def test_dbc_member_any_and_grid():
    grid = grid_distributions(3, 4)
    assert len(grid) == 15 and all(sum(p) == 1 for p in grid)
    bc = DeterministicBC(3, ((0, 1, 1), (0, 0, 1)))
    ok, p = dbc_member_any(bc, [1, 0], grid)
    assert ok and p is not None
    ok, _ = dbc_member_any(bc, [2, 0], grid)
    assert not ok


def test_dbc_from_table():
    d = DistributionTable((("X", 4), ("Y", 2)), {(x, x & 1): F(1, 4) for x in range(4)})
    bc, index = dbc_from_table(d, ["X"], ["Y"])
    assert bc.input_size == 4 and bc.functions == ((0, 1, 0, 1),)
    noisy = DistributionTable((("X", 2), ("Y", 2)), {(0, 0): F(1, 4), (0, 1): F(1, 4), (1, 1): F(1, 2)})
    with pytest.raises(ValueError):
        dbc_from_table(noisy, ["X"], ["Y"])


def box(*caps):
    k = len(caps)
    return RateRegion(k, tuple(Inequality((i,), F(c)) for i, c in enumerate(caps)))


points = st.lists(st.fractions(min_value=0, max_value=3, max_denominator=4), min_size=2, max_size=2)


@given(points)
def test_intersection_is_conjunction(r):
    a = RateRegion(2, (Inequality((0, 1), F(2)),))
    b = box(1, F(3, 2))
    assert region_membership(intersect(a, b), r) == (region_membership(a, r) and region_membership(b, r))


@given(points, st.fractions(min_value=0, max_value=1, max_denominator=4))
def test_shift(r, delta):
    a = box(1, 2)
    assert region_membership(shift_region(a, 0), r) == region_membership(a, r)
    shifted = shift_region(a, delta)
    assert region_membership(shifted, r) == region_membership(a, [x - delta for x in r])
    # intersecting regions with different offsets folds offsets into bounds
    mixed = intersect(shifted, box(2, 2))
    assert region_membership(mixed, r) == (region_membership(shifted, r) and region_membership(box(2, 2), r))


def test_boundary_and_exactness():
    a = box(1, 1)
    assert region_membership(a, [1, 1])
    assert not region_membership(a, [F(1) + F(1, 10**12), 0])
    with pytest.raises(ValueError):
        intersect(a, box(1, 1, 1))
    with pytest.raises(ValueError):
        region_membership(a, [1])
