import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netcap.fixtures import (
    butterfly_with_bypass,
    direct_relay,
    random_relay_code,
    relay_instances,
    three_unicast_relay,
)
from netcap.gf2 import Gf2Matrix
from netcap.info import DistributionTable, conditional_entropy, entropy
from netcap.linear_code import LinearNetworkCode, input_layout, synthesize_decoders
from netcap.network import DemandSpec, Network
from netcap.oracle import find_code
from netcap.regions import region_membership
from netcap.theorem import (
    StructureError,
    TheoremInstance,
    check_structure,
    choose_w_e,
    corollary_outer_bound,
    decompose,
    prepare,
    verify_bc_step,
    verify_mac_step,
    verify_theorem,
)

F = Fraction


def test_structure_examples():
    bp = butterfly_with_bypass()
    assert check_structure(bp.net, bp.demand, "a", "e")
    extra = Network.build([(e.id, e.tail, e.head, e.capacity) for e in bp.net.edges] + [("x", "v1", "v3", 1)])
    assert not check_structure(extra, bp.demand, "a", "e")
    dr = direct_relay()
    assert check_structure(dr.net, dr.demand, "a", "e")


@pytest.mark.parametrize("inst", relay_instances(), ids=lambda i: i.name)
def test_fixtures_pass(inst):
    rep = verify_theorem(TheoremInstance(inst.code, inst.node, inst.edge))
    assert rep.passed
    assert rep.eps == 0
    assert all(x.margin >= -1e-9 for x in rep.bc.lines)
    for line in rep.mac.per_source:
        r = inst.demand.rates[line.source]
        assert line.mutual_information >= inst.n * float(r - rep.delta) - 1e-9


def test_constant_sources_are_frozen():
    bp = butterfly_with_bypass()
    rep = verify_theorem(TheoremInstance(bp.code, "a", "e"))
    assert rep.constant_sources == ("1", "2")
    assert rep.passed


def test_active_sources_direct_relay():
    dr = direct_relay()
    inst = TheoremInstance(dr.code, "a", "e")
    prep = prepare(inst)
    assert prep.active == ("1", "2") and prep.eps == 0
    mac = verify_mac_step(inst, prep)
    assert mac.r_mac == pytest.approx((2, 2))
    bc = verify_bc_step(inst, 0, prep)
    assert bc.passed
    # full scan of W_e values is the oracle for the argmax
    d = prep.table
    outs = [f"Mhat:{prep.sink_of[s]}:{s}" for s in prep.active]
    scan = {w: entropy(d.condition({"W:e": w}), outs) for (w,) in d.marginal(["W:e"])}
    choice = choose_w_e(d, "W:e", outs)
    assert choice.entropy == pytest.approx(max(scan.values()))
    assert choice.value == min(w for w, h in scan.items() if h >= max(scan.values()) - 1e-12)


def test_choose_w_e_examples():
    # W constant: the only value, entropy H(Mhat)
    d = DistributionTable((("W", 2), ("Mh", 4)), {(0, m): F(1, 4) for m in range(4)})
    c = choose_w_e(d, "W", ["Mh"])
    assert c.value == 0 and c.entropy == pytest.approx(2)
    # W independent of Mhat: smallest value wins the tie
    d = DistributionTable((("W", 2), ("Mh", 2)), {(w, m): F(1, 4) for w in range(2) for m in range(2)})
    c = choose_w_e(d, "W", ["Mh"])
    assert c.value == 0 and c.entropy == pytest.approx(conditional_entropy(d, ["Mh"], ["W"]))


def test_zero_capacity_bypass():
    # identity network with a useless zero-capacity bypass: delta = 0
    net = Network.build(
        [("i1", "v1", "a", 1), ("i2", "v2", "a", 1), ("o1", "a", "v3", 1), ("o2", "a", "v4", 1), ("e", "v1", "v3", 0)],
        nodes=["v1", "v2", "a", "v3", "v4"],
    )
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "v1", "2": "v2"}, {"v3": {"1"}, "v4": {"2"}})
    enc = {
        "i1": Gf2Matrix.identity(1),
        "i2": Gf2Matrix.identity(1),
        "o1": Gf2Matrix.from_text("10"),
        "o2": Gf2Matrix.from_text("01"),
        "e": Gf2Matrix.zeros(0, 1),
    }
    code = synthesize_decoders(LinearNetworkCode(net, demand, 1, enc))
    rep = verify_theorem(TheoremInstance(code, "a", "e"))
    assert rep.passed and rep.delta == 0
    # target n R sits exactly on the boundary H(Mhat_A) = n sum R
    for line in rep.bc.lines:
        assert line.margin == pytest.approx(0, abs=1e-9)
    for line in rep.mac.per_source:
        assert line.margin == pytest.approx(0, abs=1e-9)


def test_structure_errors():
    bp = butterfly_with_bypass()
    with pytest.raises(StructureError):
        verify_theorem(TheoremInstance(bp.code, "a", "o1"))
    three = three_unicast_relay()
    multi = DemandSpec(three.demand.rates, three.demand.availability, {"v4": {"1", "2"}, "v6": {"3"}})
    with pytest.raises(StructureError):
        prepare(TheoremInstance(LinearNetworkCode(three.net, multi, 1, three.code.encoders), "a", "e"))


@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_random_relay_codes(seed, k):
    inst = random_relay_code(random.Random(seed), k=k)
    if inst.code.message_bits > 6:
        return
    rep = verify_theorem(TheoremInstance(inst.code, "a", "e"))
    assert rep.mac.passed and rep.w_e.passed and rep.bc.passed
    assert rep.passed


@pytest.mark.parametrize("seed", range(4))
def test_oracle_found_codes(seed):
    inst = random_relay_code(random.Random(seed), k=2)
    code = find_code(inst.net, inst.demand, 1, "linear")
    if code is None:
        pytest.skip("no zero-error code at these rates")
    rep = verify_theorem(TheoremInstance(code, "a", "e"))
    assert rep.passed and rep.eps == 0


def test_corollary_example():
    dr = direct_relay()
    region = corollary_outer_bound(dr.net, dr.demand, "a", "e")
    assert region_membership(region, [F(3, 2), F(3, 2)])
    assert not region_membership(region, [2, 1])


def test_corollary_delta_zero():
    dr = direct_relay()
    net = Network.build([(e.id, e.tail, e.head, 0 if e.id == "e" else e.capacity) for e in dr.net.edges], nodes=dr.net.nodes)
    region = corollary_outer_bound(net, dr.demand, "a", "e")
    assert all(o == 0 for o in region.offset)
    assert region_membership(region, [1, 1]) and not region_membership(region, [F(3, 2), 0])


def test_decomposition_parts():
    inst = relay_instances()[2]
    dec = decompose(inst.net, inst.demand, "a", "e")
    assert set(dec.upstream.nodes) == {"v1", "v2", "x", "a"}
    assert set(dec.downstream.nodes) == {"a", "y", "v3", "v4"}
    assert dec.downstream_demand.availability == {"1": "a", "2": "a"}
    assert dec.delta == 1
