"""Canonical small instances and random generators used by tests and demos."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .gf2 import Gf2Matrix
from .linear_code import LinearNetworkCode, bits, input_layout, synthesize_decoders
from .network import DemandSpec, Network

F = Fraction


@dataclass(frozen=True)
class Instance:
    """A network with demands, plus optional code and designated node/edge."""

    name: str
    net: Network
    demand: DemandSpec
    code: LinearNetworkCode | None = None
    node: str | None = None
    edge: str | None = None
    n: int = 1


def _enc(code_net: Network, demand: DemandSpec, n: int, rows: dict[str, list[str]]) -> dict[str, Gf2Matrix]:
    """Encoders from row strings; any edge not listed gets a zero matrix."""
    out = {}
    for e in code_net.edges:
        width = sum(b.width for b in input_layout(code_net, demand, n, e.tail))
        if e.id in rows:
            out[e.id] = Gf2Matrix.from_text("\n".join(rows[e.id]), width)
        else:
            out[e.id] = Gf2Matrix.zeros(bits(n, e.capacity), width)
    return out


def single_edge(capacity=3) -> Instance:
    net = Network.build([("e", "s", "t", capacity)], name="single-edge")
    demand = DemandSpec({"1": F(0)}, {"1": "s"}, {"t": {"1"}})
    return Instance("single-edge", net, demand)


def relay_chain() -> Instance:
    net = Network.build([("e1", "v1", "a", 1), ("e2", "a", "v2", 1)], name="relay-chain")
    demand = DemandSpec({"1": 1}, {"1": "v1"}, {"v2": {"1"}})
    enc = _enc(net, demand, 1, {"e1": ["1"], "e2": ["1"]})
    code = LinearNetworkCode(net, demand, 1, enc, {("v2", "1"): Gf2Matrix.identity(1)})
    return Instance("relay-chain", net, demand, code)


def butterfly_multicast() -> Instance:
    """Seven-node butterfly, one source of rate 2 multicast to both sinks."""
    edges = [
        ("sa", "s", "a", 1),
        ("sb", "s", "b", 1),
        ("ac", "a", "c", 1),
        ("bc", "b", "c", 1),
        ("cd", "c", "d", 1),
        ("dt1", "d", "t1", 1),
        ("dt2", "d", "t2", 1),
        ("at1", "a", "t1", 1),
        ("bt2", "b", "t2", 1),
    ]
    net = Network.build(edges, nodes=["s", "a", "b", "c", "d", "t1", "t2"], name="butterfly")
    demand = DemandSpec({"1": 2}, {"1": "s"}, {"t1": {"1"}, "t2": {"1"}})
    # bit 0 -> a, bit 1 -> b, XOR through the middle
    enc = _enc(
        net,
        demand,
        1,
        {"sa": ["10"], "sb": ["01"], "ac": ["1"], "bc": ["1"], "cd": ["11"], "dt1": ["1"], "dt2": ["1"], "at1": ["1"], "bt2": ["1"]},
    )
    code = synthesize_decoders(LinearNetworkCode(net, demand, 1, enc))
    return Instance("butterfly-multicast", net, demand, code, edge="cd")


def butterfly_two_unicast() -> Instance:
    """Two crossing unicasts that need the XOR on the bottleneck ``cd``."""
    edges = [
        ("s1c", "s1", "c", 1),
        ("s2c", "s2", "c", 1),
        ("cd", "c", "d", 1),
        ("dt1", "d", "t1", 1),
        ("dt2", "d", "t2", 1),
        ("s1t2", "s1", "t2", 1),
        ("s2t1", "s2", "t1", 1),
    ]
    net = Network.build(edges, nodes=["s1", "s2", "c", "d", "t1", "t2"], name="butterfly-2-unicast")
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "s1", "2": "s2"}, {"t1": {"1"}, "t2": {"2"}})
    enc = _enc(
        net,
        demand,
        1,
        {"s1c": ["1"], "s2c": ["1"], "cd": ["11"], "dt1": ["1"], "dt2": ["1"], "s1t2": ["1"], "s2t1": ["1"]},
    )
    code = synthesize_decoders(LinearNetworkCode(net, demand, 1, enc))
    return Instance("butterfly-2-unicast", net, demand, code, edge="cd")


def shared_edge_two_unicast() -> Instance:
    """Two unicasts forced through one unit edge with no side information."""
    edges = [("s1m", "s1", "m", 1), ("s2m", "s2", "m", 1), ("mn", "m", "n", 1), ("nt1", "n", "t1", 1), ("nt2", "n", "t2", 1)]
    net = Network.build(edges, name="shared-edge")
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "s1", "2": "s2"}, {"t1": {"1"}, "t2": {"2"}})
    return Instance("shared-edge", net, demand, edge="mn")


# relay-node instances: every source-to-sink path passes node a or edge e


def butterfly_with_bypass() -> Instance:
    """``a`` sends ``M1 xor M2`` to v3 and ``M2`` to v4; the bypass ``e`` hands v3 ``M2``."""
    edges = [
        ("e1", "v1", "a", 1),
        ("e2", "v2", "a", 1),
        ("o1", "a", "v3", 1),
        ("o2", "a", "v4", 1),
        ("e", "v2", "v3", 1),
    ]
    net = Network.build(edges, nodes=["v1", "v2", "a", "v3", "v4"], name="butterfly-with-bypass")
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "v1", "2": "v2"}, {"v3": {"1"}, "v4": {"2"}})
    enc = _enc(net, demand, 1, {"e1": ["1"], "e2": ["1"], "o1": ["11"], "o2": ["01"], "e": ["1"]})
    code = synthesize_decoders(LinearNetworkCode(net, demand, 1, enc))
    return Instance("butterfly-with-bypass", net, demand, code, node="a", edge="e")


def direct_relay() -> Instance:
    """Sources wired straight into ``a``, ``a`` wired straight to the sinks, half-unit bypass.

    At blocklength 2 each source sends two bits; the bypass carries the first
    bit of ``M1`` and the relay forwards everything.
    """
    edges = [
        ("i1", "v1", "a", 1),
        ("i2", "v2", "a", 1),
        ("o1", "a", "v3", 1),
        ("o2", "a", "v4", 1),
        ("e", "v1", "v3", F(1, 2)),
    ]
    net = Network.build(edges, nodes=["v1", "v2", "a", "v3", "v4"], name="direct-relay")
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "v1", "2": "v2"}, {"v3": {"1"}, "v4": {"2"}})
    # a's input: i1 (2 bits) then i2 (2 bits)
    enc = _enc(net, demand, 2, {"i1": ["10", "01"], "i2": ["10", "01"], "o1": ["1000", "0100"], "o2": ["0010", "0001"], "e": ["10"]})
    code = synthesize_decoders(LinearNetworkCode(net, demand, 2, enc))
    return Instance("direct-relay", net, demand, code, node="a", edge="e", n=2)


def relay_with_subnetworks() -> Instance:
    """A mixing node before ``a`` and a splitting node after it; the bypass is unused."""
    edges = [
        ("x1", "v1", "x", 1),
        ("x2", "v2", "x", 1),
        ("xa", "x", "a", 2),
        ("ay", "a", "y", 2),
        ("y3", "y", "v3", 1),
        ("y4", "y", "v4", 1),
        ("e", "v2", "v4", 1),
    ]
    net = Network.build(edges, nodes=["v1", "v2", "x", "a", "y", "v3", "v4"], name="relay-subnetworks")
    demand = DemandSpec({"1": 1, "2": 1}, {"1": "v1", "2": "v2"}, {"v3": {"1"}, "v4": {"2"}})
    enc = _enc(net, demand, 1, {"x1": ["1"], "x2": ["1"], "xa": ["10", "01"], "ay": ["10", "01"], "y3": ["10"], "y4": ["01"]})
    code = synthesize_decoders(LinearNetworkCode(net, demand, 1, enc))
    return Instance("relay-subnetworks", net, demand, code, node="a", edge="e")


def three_unicast_relay() -> Instance:
    edges = [
        ("i1", "v1", "a", 1),
        ("i2", "v2", "a", 1),
        ("i3", "v3", "a", 1),
        ("o1", "a", "v4", 1),
        ("o2", "a", "v5", 1),
        ("o3", "a", "v6", 1),
        ("e", "v1", "v4", 1),
    ]
    net = Network.build(edges, nodes=["v1", "v2", "v3", "a", "v4", "v5", "v6"], name="three-unicast-relay")
    demand = DemandSpec(
        {"1": 1, "2": 1, "3": 1}, {"1": "v1", "2": "v2", "3": "v3"}, {"v4": {"1"}, "v5": {"2"}, "v6": {"3"}}
    )
    enc = _enc(net, demand, 1, {"i1": ["1"], "i2": ["1"], "i3": ["1"], "o1": ["100"], "o2": ["010"], "o3": ["001"], "e": ["1"]})
    code = synthesize_decoders(LinearNetworkCode(net, demand, 1, enc))
    return Instance("three-unicast-relay", net, demand, code, node="a", edge="e")


def relay_instances() -> list[Instance]:
    return [butterfly_with_bypass(), direct_relay(), relay_with_subnetworks(), three_unicast_relay()]


# all sources at one node


def super_source_instances() -> list[Instance]:
    out = []
    net = Network.build([("p1", "s", "t", 1), ("p2", "s", "t", 1)], name="ss-parallel")
    out.append(Instance("ss-parallel", net, DemandSpec({"1": 1, "2": 1}, {"1": "s", "2": "s"}, {"t": {"1", "2"}}), edge="p1"))

    bf = butterfly_multicast().net
    out.append(
        Instance(
            "ss-butterfly",
            bf,
            DemandSpec({"1": 1, "2": 1}, {"1": "s", "2": "s"}, {"t1": {"1", "2"}, "t2": {"1", "2"}}),
            edge="cd",
        )
    )

    net = Network.build([("sa", "s", "a", 1), ("sb", "s", "b", 1), ("at1", "a", "t1", 1), ("bt2", "b", "t2", 1), ("at2", "a", "t2", 1)], name="ss-cross")
    out.append(Instance("ss-cross", net, DemandSpec({"1": 1, "2": 1}, {"1": "s", "2": "s"}, {"t1": {"1"}, "t2": {"2"}}), edge="sa"))

    net = Network.build([("sm", "s", "m", 2), ("mt1", "m", "t1", 1), ("mt2", "m", "t2", 1)], name="ss-line")
    out.append(Instance("ss-line", net, DemandSpec({"1": 1, "2": 1}, {"1": "s", "2": "s"}, {"t1": {"1"}, "t2": {"2"}}), edge="sm"))

    net = Network.build([("st", "s", "t", 1), ("sm", "s", "m", F(1, 2)), ("mt", "m", "t", F(1, 2))], name="ss-half")
    out.append(
        Instance("ss-half", net, DemandSpec({"1": 1, "2": F(1, 2)}, {"1": "s", "2": "s"}, {"t": {"1", "2"}}), edge="st", n=2)
    )

    net = Network.build(
        [("sa", "s", "a", 1), ("sb", "s", "b", 1), ("ab", "a", "b", 1), ("at", "a", "t1", 1), ("bt", "b", "t2", 1)],
        name="ss-relay",
    )
    out.append(Instance("ss-relay", net, DemandSpec({"1": 1, "2": 1}, {"1": "s", "2": "s"}, {"t1": {"1"}, "t2": {"1", "2"}}), edge="ab"))
    return out


# random generators


def random_dag(rng: random.Random, max_nodes: int = 8, max_edges: int = 12, capacities=(1, 2, 3), min_nodes: int = 2) -> Network:
    """Random DAG on nodes ``v0..``; edges always point to a later node; parallel edges allowed."""
    k = rng.randint(min_nodes, max_nodes)
    nodes = [f"v{i}" for i in range(k)]
    m = rng.randint(1, max_edges)
    edges = []
    for i in range(m):
        a, b = sorted(rng.sample(range(k), 2))
        edges.append((f"e{i:02d}", nodes[a], nodes[b], F(rng.choice(capacities))))
    return Network.build(edges, nodes=nodes, name="random")


def random_linear_code(
    rng: random.Random,
    max_nodes: int = 8,
    max_edges: int = 12,
    max_n: int = 4,
    max_message_bits: int = 6,
    max_sources: int = 3,
) -> LinearNetworkCode:
    """Random encoders on a random DAG, with decoders synthesized where possible.

    Edge widths ``n*C_e`` are 1..3 bits and source widths ``n*R_s`` 1..3 bits,
    so capacities and rates are multiples of ``1/n``.
    """
    n = rng.randint(1, max_n)
    k_nodes = rng.randint(3, max_nodes)
    nodes = [f"v{i}" for i in range(k_nodes)]
    m = rng.randint(2, max_edges)
    edges = []
    for i in range(m):
        a, b = sorted(rng.sample(range(k_nodes), 2))
        edges.append((f"e{i:02d}", nodes[a], nodes[b], F(rng.randint(1, 3), n)))
    net = Network.build(edges, nodes=nodes)
    k = rng.randint(1, max_sources)
    rates, avail, demands = {}, {}, {}
    budget = max_message_bits
    for j in range(k):
        w = rng.randint(1, max(1, min(3, budget - (k - j - 1))))
        budget -= w
        s = str(j + 1)
        rates[s] = F(w, n)
        pos = rng.randrange(k_nodes - 1)
        avail[s] = nodes[pos]
        sink = nodes[rng.randrange(pos + 1, k_nodes)]
        demands.setdefault(sink, set()).add(s)
    demand = DemandSpec(rates, avail, demands)
    enc = {}
    for e in net.edges:
        width = sum(b.width for b in input_layout(net, demand, n, e.tail))
        enc[e.id] = Gf2Matrix.random(bits(n, e.capacity), width, rng)
    return synthesize_decoders(LinearNetworkCode(net, demand, n, enc))


def random_relay_code(rng: random.Random, k: int = 2, n: int = 1) -> Instance:
    """Random linear code on a random relay-node network with k unicasts.

    Sources feed ``a`` (possibly through a mixer), ``a`` feeds the sinks
    (possibly through a splitter), and one bypass edge joins a random source
    to a random sink.
    """
    srcs = [f"v{i + 1}" for i in range(k)]
    sinks = [f"v{k + i + 1}" for i in range(k)]
    edges = []
    if rng.random() < 0.5:
        for i, s in enumerate(srcs):
            edges.append((f"i{i + 1}", s, "a", F(rng.randint(1, 2), n)))
    else:
        for i, s in enumerate(srcs):
            edges.append((f"i{i + 1}", s, "x", F(rng.randint(1, 2), n)))
        edges.append(("xa", "x", "a", F(rng.randint(1, 3), n)))
    for i, t in enumerate(sinks):
        edges.append((f"o{i + 1}", "a", t, F(rng.randint(1, 2), n)))
    edges.append(("e", rng.choice(srcs), rng.choice(sinks), F(rng.randint(1, 2), n)))
    nodes = srcs + (["x"] if any(e[2] == "x" for e in edges) else []) + ["a"] + sinks
    net = Network.build(edges, nodes=nodes, name="random-relay")
    rates = {str(i + 1): F(rng.randint(1, 2), n) for i in range(k)}
    demand = DemandSpec(rates, {str(i + 1): srcs[i] for i in range(k)}, {sinks[i]: {str(i + 1)} for i in range(k)})
    enc = {}
    for e in net.edges:
        width = sum(b.width for b in input_layout(net, demand, n, e.tail))
        enc[e.id] = Gf2Matrix.random(bits(n, e.capacity), width, rng)
    code = synthesize_decoders(LinearNetworkCode(net, demand, n, enc))
    return Instance("random-relay", net, demand, code, node="a", edge="e", n=n)


def named_instances() -> list[Instance]:
    return [relay_chain(), butterfly_multicast(), butterfly_two_unicast(), shared_edge_two_unicast()] + relay_instances() + super_source_instances()


def write_fixture_files(directory) -> list:
    """Write every named instance as ``<name>.net.json`` (and ``.code.json`` when it has a code)."""
    from pathlib import Path

    from .serialize import Problem, code_to_obj, dumps, problem_to_obj

    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for inst in named_instances():
        p = out / f"{inst.name}.net.json"
        p.write_text(dumps(problem_to_obj(Problem(inst.net, inst.demand))))
        paths.append(p)
        if inst.code is not None:
            c = out / f"{inst.name}.code.json"
            c.write_text(dumps(code_to_obj(inst.code)))
            paths.append(c)
    return paths
