import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcap.fixtures import butterfly_two_unicast, shared_edge_two_unicast, single_edge, super_source_instances
from netcap.info import induced_distribution
from netcap.linear_code import LinearNetworkCode, check_decodable, synthesize_decoders
from netcap.network import DemandSpec, Network
from netcap.oracle import (
    BudgetExceeded,
    GeneralCode,
    achievable_set,
    dbc_zero_error_code,
    dbc_zero_error_rates,
    default_budget,
    delta_gap_report,
    enumerate_codes,
    find_code,
    parse_budget,
    search_space_size,
)
from netcap.regions import DeterministicBC

F = Fraction


def rates(a):
    return {tuple(int(x) if x.denominator == 1 else x for x in r) for r in a.rates}


def test_search_space_counts():
    inst = single_edge(1)
    demand = inst.demand.with_rates({"1": 1})
    assert search_space_size(inst.net, demand, 1, "linear") == 2
    assert search_space_size(inst.net, demand, 1, "all") == 4
    net = Network.build([("a", "s", "m", 2), ("b", "m", "t", 1)])
    demand = DemandSpec({"1": 2}, {"1": "s"}, {"t": {"1"}})
    # 2x2 then 1x2 matrices: 2^4 * 2^2
    assert search_space_size(net, demand, 1, "linear") == 2**6
    assert len(list(enumerate_codes(net, demand, 1, "linear"))) == 2**6


def test_empty_network_has_one_code():
    net = Network(("v",), ())
    demand = DemandSpec({}, {}, {})
    assert len(list(enumerate_codes(net, demand, 1))) == 1


def test_budget(monkeypatch):
    bf = butterfly_two_unicast()
    with pytest.raises(BudgetExceeded):
        find_code(bf.net, bf.demand, 1, "all", budget=10)
    monkeypatch.setenv("NETCODE_BUDGET", "2^3")
    assert default_budget() == 8
    with pytest.raises(BudgetExceeded):
        achievable_set(bf.net, bf.demand, 1, "linear", workers=1)
    monkeypatch.delenv("NETCODE_BUDGET")
    assert default_budget() == 1 << 24
    assert parse_budget("2^10") == 1024 and parse_budget("77") == 77


def test_single_unicast():
    inst = single_edge(1)
    a = achievable_set(inst.net, inst.demand, 1, "linear", workers=1)
    assert rates(a) == {(0,), (1,)}


def test_butterfly_two_unicast():
    bf = butterfly_two_unicast()
    a = achievable_set(bf.net, bf.demand, 1, "linear", workers=1)
    assert (1, 1) in rates(a)
    code = find_code(bf.net, bf.demand, 1)
    assert all(check_decodable(code).values())


def test_shared_edge_refutation():
    inst = shared_edge_two_unicast()
    for mode in ("linear", "all"):
        got = rates(achievable_set(inst.net, inst.demand, 1, mode, workers=1))
        assert (1, 1) not in got
        assert {(1, 0), (0, 1), (0, 0)} <= got


def test_found_general_code_decodes():
    inst = shared_edge_two_unicast()
    code = find_code(inst.net, inst.demand.with_rates({"1": 1, "2": 0}), 1, "all")
    assert isinstance(code, GeneralCode)
    vals = code.evaluate_all()
    assert (vals["Mhat:t1:1"] == vals["M:1"]).all()
    d = induced_distribution(code)
    assert sum(d.probs.values()) == 1


def tiny_instance(rng):
    nodes = ["s1", "s2", "m", "t1", "t2"]
    candidates = [("s1", "m"), ("s2", "m"), ("m", "t1"), ("m", "t2"), ("s1", "t1"), ("s1", "t2"), ("s2", "t1"), ("s2", "t2")]
    chosen = rng.sample(candidates, rng.randint(3, 5))
    net = Network.build([(f"e{i}", a, b, 1) for i, (a, b) in enumerate(chosen)], nodes=nodes)
    demand = DemandSpec({"1": rng.randint(0, 1), "2": rng.randint(0, 1)}, {"1": "s1", "2": "s2"}, {"t1": {"1"}, "t2": {"2"}})
    return net, demand


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_search_agrees_with_plain_enumeration(seed):
    net, demand = tiny_instance(random.Random(seed))
    plain = False
    for code in enumerate_codes(net, demand, 1, "linear"):
        if all(check_decodable(synthesize_decoders(code)).values()):
            plain = True
            break
    assert (find_code(net, demand, 1, "linear") is not None) == plain


@settings(max_examples=15)
@given(st.integers(0, 10**6))
def test_linear_inside_all_and_downward_closed(seed):
    net, demand = tiny_instance(random.Random(seed))
    lin = achievable_set(net, demand, 1, "linear", workers=1)
    full = achievable_set(net, demand, 1, "all", workers=1)
    assert set(lin.rates) <= set(full.rates)
    for a in (lin, full):
        got = set(a.rates)
        for r in got:
            for lower in a.grid:
                if all(x <= y for x, y in zip(lower, r)):
                    assert lower in got


def test_worker_count_does_not_matter():
    inst = super_source_instances()[1]
    one = achievable_set(inst.net, inst.demand, 1, "linear", workers=1)
    two = achievable_set(inst.net, inst.demand, 1, "linear", workers=2)
    assert one == two


def test_gap_unused_edge():
    net = Network.build([("e", "s", "t", 1), ("u", "s", "x", 1)])
    demand = DemandSpec({"1": 1}, {"1": "s"}, {"t": {"1"}})
    rep = delta_gap_report(net, demand, "u", 1, 1, workers=1)
    assert rep.worst_gap == 0 and rep.passed


def test_gap_butterfly():
    bf = butterfly_two_unicast()
    rep = delta_gap_report(bf.net, bf.demand, "cd", 1, 1, workers=1)
    assert rep.passed and rep.worst_gap == 1
    # without the bottleneck neither sink sees its own source at all
    assert rates(rep.reduced) == {(0, 0)}


@pytest.mark.parametrize("inst", super_source_instances(), ids=lambda i: i.name)
def test_gap_super_source(inst):
    rep = delta_gap_report(inst.net, inst.demand, inst.edge, inst.net.edge(inst.edge).capacity, inst.n, "linear", workers=1)
    assert rep.passed


def test_dbc_zero_error():
    split = DeterministicBC(4, ((0, 0, 1, 1), (0, 1, 0, 1)))
    code = dbc_zero_error_code(split, (1, 1))
    assert code is not None and len(code) == 4
    assert set(dbc_zero_error_rates(split)) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    same = DeterministicBC(2, ((0, 1), (0, 1)))
    assert dbc_zero_error_code(same, (1, 1)) is None
    assert set(dbc_zero_error_rates(same)) == {(0, 0), (1, 0), (0, 1)}


def test_dbc_codes_decode():
    rng = random.Random(3)
    for _ in range(20):
        size = rng.randint(2, 8)
        bc = DeterministicBC(size, tuple(tuple(rng.randrange(3) for _ in range(size)) for _ in range(2)))
        for r in dbc_zero_error_rates(bc):
            code = dbc_zero_error_code(bc, r)
            for t, x in code.items():
                for u, y in code.items():
                    for s in range(2):
                        if bc.functions[s][x] == bc.functions[s][y]:
                            assert t[s] == u[s]
