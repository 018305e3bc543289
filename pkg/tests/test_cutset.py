import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netcap.cutset import (
    GENERAL,
    MULTI_SOURCE_MULTICAST,
    MULTICAST,
    NON_OVERLAPPING,
    NON_OVERLAPPING_PLUS_MULTICAST,
    UnsupportedDemandError,
    check_cut_drops,
    check_delta_robustness,
    classify_demand,
    cutset_region,
    region_membership,
    sample_region_points,
)
from netcap.fixtures import butterfly_multicast, random_dag, shared_edge_two_unicast, single_edge
from netcap.network import DemandSpec, Network

F = Fraction


def single_bound(region, sink):
    return [c.bound for c in region.constraints if c.sink == sink]


def test_butterfly_multicast_bound():
    bf = butterfly_multicast()
    region = cutset_region(bf.net, bf.demand)
    assert region.demand_type == MULTICAST and region.tight
    assert min(c.bound for c in region.constraints) == 2
    assert region_membership(region, [2]) and not region_membership(region, [F(5, 2)])


def test_single_edge():
    inst = single_edge(3)
    region = cutset_region(inst.net, inst.demand)
    assert [c.bound for c in region.constraints] == [3]


def test_shared_edge_sum_bound():
    inst = shared_edge_two_unicast()
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "s1", "2": "s2"}, {"t1": {"1", "2"}, "t2": {"1", "2"}})
    region = cutset_region(inst.net, demand)
    assert region.demand_type == MULTI_SOURCE_MULTICAST
    sums = [c.bound for c in region.constraints if c.sources == ("1", "2")]
    assert sums and min(sums) == 1
    with pytest.raises(UnsupportedDemandError):
        cutset_region(inst.net, inst.demand)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        general = cutset_region(inst.net, inst.demand, allow_general=True)
    assert general.demand_type == GENERAL and not general.tight and w


def test_classification():
    at_s = {"1": "s", "2": "s"}
    rates = {"1": 1, "2": 1}
    assert classify_demand(DemandSpec(rates, at_s, {"a": {"1"}, "b": {"2"}})) == NON_OVERLAPPING
    assert classify_demand(DemandSpec(rates, at_s, {"a": {"1", "2"}, "b": {"2"}})) == NON_OVERLAPPING_PLUS_MULTICAST
    assert classify_demand(DemandSpec(rates, at_s, {"a": {"1", "2"}})) == MULTI_SOURCE_MULTICAST
    with pytest.raises(UnsupportedDemandError):
        classify_demand(DemandSpec(rates, at_s, {"a": {"1", "2"}, "b": {"2"}, "c": {"2"}}))
    with pytest.raises(UnsupportedDemandError):
        classify_demand(DemandSpec(rates, {"1": "s", "2": "u"}, {"a": {"1"}, "b": {"2"}}))


def test_membership_examples():
    bf = butterfly_multicast()
    region = cutset_region(bf.net, bf.demand)
    assert region_membership(region, [0])
    assert region_membership(region, {"1": 2})
    assert not region_membership(region, [3])


def test_bottleneck_removal_bound():
    bf = butterfly_multicast()
    rep = check_delta_robustness(bf.net, bf.demand, "cd", 1)
    assert rep.passed
    assert min(after for _, after in rep.bound_drops) == 1


def test_delta_zero_identical():
    bf = butterfly_multicast()
    rep = check_delta_robustness(bf.net, bf.demand, "cd", 0)
    assert all(c.bound == after for c, after in rep.bound_drops)


def test_sampled_points_are_inside():
    bf = butterfly_multicast()
    region = cutset_region(bf.net, bf.demand)
    pts = sample_region_points(region, 50, random.Random(1))
    assert all(region_membership(region, p) for p in pts)


def random_instance(rng):
    net = random_dag(rng, max_nodes=8, max_edges=12, capacities=(F(1), F(2), F(1, 2)))
    nodes = list(net.nodes)
    src = nodes[0]
    sinks = rng.sample(nodes[1:], min(2, len(nodes) - 1))
    if rng.random() < 0.5:
        demand = DemandSpec({"1": 0}, {"1": src}, {t: {"1"} for t in sinks})
    else:
        demand = DemandSpec({"1": 0, "2": 0}, {"1": src, "2": src}, {sinks[0]: {"1"}, sinks[-1]: {"2"} if len(sinks) > 1 else {"1", "2"}})
    return net, demand


@given(st.integers(0, 10**6))
def test_robustness_random(seed):
    rng = random.Random(seed)
    net, demand = random_instance(rng)
    for e in net.edges:
        for delta in (e.capacity, e.capacity / 2):
            rep = check_delta_robustness(net, demand, e.id, delta, rng=random.Random(seed), n_probes=20)
            assert rep.passed


@given(st.integers(0, 10**6))
def test_cut_drops_random(seed):
    rng = random.Random(seed)
    net = random_dag(rng, max_nodes=7, max_edges=10)
    nodes = list(net.nodes)
    for e in net.edges:
        rep = check_cut_drops(net, e.id, e.capacity, [nodes[0]], [nodes[-1]])
        assert rep.passed
