import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netcap.fixtures import butterfly_two_unicast, random_linear_code, relay_chain
from netcap.gf2 import Gf2Matrix
from netcap.linear_code import (
    BlocklengthError,
    LinearNetworkCode,
    all_message_tuples,
    check_blocklength,
    check_decodable,
    check_decodable_exhaustive,
    compute_transfer_matrices,
    evaluate_all,
    extend_blocklength,
    input_layout,
    pack_messages,
    simulate_code,
    synthesize_decoders,
    unpack_messages,
)
from netcap.network import DemandSpec, Network

codes = st.integers(0, 10**6).map(lambda seed: random_linear_code(random.Random(seed)))


def test_relay_chain_transfer_is_identity():
    code = relay_chain().code
    tm = compute_transfer_matrices(code)
    assert tm.a("1", "e1") == Gf2Matrix.identity(1)
    assert tm.a("1", "e2") == Gf2Matrix.identity(1)
    for m in (0, 1):
        assert simulate_code(code, {"1": m}).reconstructions[("v2", "1")] == m


def test_butterfly_xor():
    code = butterfly_two_unicast().code
    tm = compute_transfer_matrices(code)
    assert tm.a("1", "cd") == Gf2Matrix.identity(1) == tm.a("2", "cd")
    for m1, m2 in itertools.product((0, 1), repeat=2):
        res = simulate_code(code, {"1": m1, "2": m2})
        assert res.edges["cd"] == m1 ^ m2
        assert res.reconstructions[("t1", "1")] == m1
        assert res.reconstructions[("t2", "2")] == m2
    assert all(check_decodable(code).values())


def test_zero_block_gives_zero_transfer():
    net = Network.build([("e", "s", "t", 1)])
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "s", "2": "s"}, {"t": {"1"}})
    code = LinearNetworkCode(net, demand, 1, {"e": Gf2Matrix.from_text("10")})
    tm = compute_transfer_matrices(code)
    assert tm.a("2", "e").is_zero() and tm.a("1", "e") == Gf2Matrix.identity(1)


def test_zero_decoder_not_decodable():
    rc = relay_chain().code
    bad = LinearNetworkCode(rc.net, rc.demand, 1, rc.encoders, {("v2", "1"): Gf2Matrix.zeros(1, 1)})
    assert check_decodable(bad) == {("v2", "1"): False}
    missing = LinearNetworkCode(rc.net, rc.demand, 1, rc.encoders)
    assert check_decodable(missing) == {("v2", "1"): False}


def test_layout_order():
    net = Network.build([("z", "u", "v", 1), ("a", "w", "v", 2)])
    demand = DemandSpec({"2": 1, "1": 1}, {"1": "v", "2": "v"}, {})
    blocks = input_layout(net, demand, 1, "v")
    assert [(b.kind, b.id, b.width, b.offset) for b in blocks] == [
        ("source", "1", 1, 0),
        ("source", "2", 1, 1),
        ("edge", "a", 2, 2),
        ("edge", "z", 1, 4),
    ]


def test_blocklength_checks():
    net = Network.build([("e", "s", "t", Fraction(1, 2))])
    demand = DemandSpec({"1": Fraction(1, 2)}, {"1": "s"}, {"t": {"1"}})
    check_blocklength(net, demand, 2)
    with pytest.raises(BlocklengthError):
        check_blocklength(net, demand, 1)


def test_shape_validation():
    rc = relay_chain().code
    enc = dict(rc.encoders)
    enc["e1"] = Gf2Matrix.zeros(2, 1)
    with pytest.raises(ValueError):
        LinearNetworkCode(rc.net, rc.demand, 1, enc)


@given(codes)
def test_linearity_and_zero_input(code):
    res = simulate_code(code, {s: 0 for s in code.demand.sources})
    assert all(v == 0 for v in res.edges.values())
    tuples = list(all_message_tuples(code))
    rng = random.Random(0)
    a, b = rng.choice(tuples), rng.choice(tuples)
    ra, rb = simulate_code(code, a), simulate_code(code, b)
    rs = simulate_code(code, {s: a[s] ^ b[s] for s in a})
    assert all(rs.edges[e] == ra.edges[e] ^ rb.edges[e] for e in rs.edges)


@given(codes)
def test_transfer_matrices_predict_simulation(code):
    tm = compute_transfer_matrices(code)
    for m in all_message_tuples(code):
        packed = pack_messages(code.demand, code.n, m)
        res = simulate_code(code, m)
        for e, w in res.edges.items():
            assert tm.predict(e, packed) == w


@given(codes)
def test_algebraic_and_exhaustive_decodability_agree(code):
    assert check_decodable(code) == check_decodable_exhaustive(code)


@given(codes)
def test_evaluate_all_matches_simulation(code):
    vals = evaluate_all(code)
    for packed, m in enumerate(all_message_tuples(code)):
        res = simulate_code(code, m)
        for e, w in res.edges.items():
            assert int(vals[f"W:{e}"][packed]) == w
        for (v, s), r in res.reconstructions.items():
            assert int(vals[f"Mhat:{v}:{s}"][packed]) == r


@given(codes)
def test_synthesized_decoders_are_correct_where_possible(code):
    stripped = LinearNetworkCode(code.net, code.demand, code.n, code.encoders)
    again = synthesize_decoders(stripped)
    assert check_decodable(again) == check_decodable(code)


@given(codes, st.integers(2, 3))
def test_extend_blocklength_preserves_behavior(code, factor):
    if code.message_bits * factor > 14:
        return
    big = extend_blocklength(code, factor)
    assert big.n == code.n * factor
    assert check_decodable(big) == check_decodable(code)
    small_vals = evaluate_all(code)
    big_vals = evaluate_all(big)
    # copy 0 with all other copies zero behaves like the original code
    for packed, m in enumerate(all_message_tuples(code)):
        big_packed = pack_messages(big.demand, big.n, {s: m[s] for s in m})
        for e in code.net.edges:
            w = int(code.n * e.capacity)
            got = int(big_vals[f"W:{e.id}"][big_packed]) & ((1 << w) - 1)
            assert got == int(small_vals[f"W:{e.id}"][packed])


def test_pack_unpack():
    demand = DemandSpec({"1": 2, "2": 1}, {"1": "s", "2": "s"}, {})
    p = pack_messages(demand, 1, {"1": 0b10, "2": 1})
    assert p == 0b110
    assert unpack_messages(demand, 1, p) == {"1": 0b10, "2": 1}


def test_simulate_rejects_long_message():
    with pytest.raises(ValueError):
        simulate_code(relay_chain().code, {"1": 2})
