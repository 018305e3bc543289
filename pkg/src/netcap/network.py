"""Acyclic networks of error-free bit pipes, demands, cuts and max-flow.

All capacities and rates are :class:`fractions.Fraction`; node, edge and
source ids are opaque strings and every tie is broken by ascending id.
"""

from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

MAX_CUT_NODES = 20


def to_fraction(value: object) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            if sep and int(den) == 0:
                raise ValueError(f"zero denominator in rational {value!r}")
            return Fraction(int(num), int(den)) if sep else Fraction(int(num))
        except ValueError as exc:
            raise ValueError(f"malformed rational {value!r}") from exc
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    capacity: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "capacity", to_fraction(self.capacity))


@dataclass(frozen=True)
class Network:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @classmethod
    def build(cls, edges: Iterable[tuple], nodes: Iterable[str] = (), name: str = "") -> Network:
        """Convenience constructor from ``(id, tail, head, capacity)`` tuples.

        Nodes are collected from the edges in order of first appearance after
        any explicitly listed ``nodes``.
        """
        es = [Edge(i, t, h, to_fraction(c)) for i, t, h, c in edges]
        seen = list(dict.fromkeys(list(nodes) + [x for e in es for x in (e.tail, e.head)]))
        return cls(tuple(seen), tuple(es), name)

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(f"unknown edge {edge_id!r}")

    def has_edge(self, edge_id: str) -> bool:
        return any(e.id == edge_id for e in self.edges)

    def in_edges(self, v: str) -> list[Edge]:
        return sorted((e for e in self.edges if e.head == v), key=lambda e: e.id)

    def out_edges(self, v: str) -> list[Edge]:
        return sorted((e for e in self.edges if e.tail == v), key=lambda e: e.id)


@dataclass(frozen=True)
class DemandSpec:
    """Sources with rates, where each source is available, and who wants what."""

    rates: Mapping[str, Fraction]
    availability: Mapping[str, str]
    demands: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rates", {s: to_fraction(r) for s, r in sorted(self.rates.items())})
        object.__setattr__(self, "availability", dict(sorted(self.availability.items())))
        dem = {v: frozenset(ss) for v, ss in sorted(self.demands.items())}
        object.__setattr__(self, "demands", {v: ss for v, ss in dem.items() if ss})
        if set(self.rates) != set(self.availability):
            raise ValueError("every source needs exactly one rate and one availability node")
        for r in self.rates.values():
            if r < 0:
                raise ValueError("negative source rate")
        for v, ss in self.demands.items():
            unknown = ss - set(self.rates)
            if unknown:
                raise ValueError(f"node {v!r} demands unknown sources {sorted(unknown)}")

    @property
    def sources(self) -> tuple[str, ...]:
        return tuple(sorted(self.rates))

    def sigma(self, v: str) -> tuple[str, ...]:
        """Sources available at node ``v``, ascending by id."""
        return tuple(s for s in self.sources if self.availability[s] == v)

    def beta(self, v: str) -> frozenset[str]:
        return self.demands.get(v, frozenset())

    @property
    def sinks(self) -> tuple[str, ...]:
        return tuple(sorted(self.demands))

    def with_rates(self, rates: Mapping[str, object]) -> DemandSpec:
        return replace(self, rates={s: to_fraction(r) for s, r in rates.items()})

    def check_against(self, net: Network) -> None:
        nodes = set(net.nodes)
        for s, v in self.availability.items():
            if v not in nodes:
                raise ValueError(f"source {s!r} available at unknown node {v!r}")
        for v in self.demands:
            if v not in nodes:
                raise ValueError(f"demand at unknown node {v!r}")


@dataclass(frozen=True)
class Cut:
    source_side: frozenset[str]
    crossing_edges: frozenset[str]
    capacity: Fraction


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


class CycleError(ValueError):
    pass


def _kahn(nodes: Iterable[str], edges: Iterable[Edge]) -> tuple[list[str], bool]:
    nodes = list(nodes)
    indeg = {v: 0 for v in nodes}
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for e in edges:
        if e.tail in succ and e.head in indeg:
            succ[e.tail].append(e.head)
            indeg[e.head] += 1
    heap = [v for v, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return order, len(order) == len(nodes)


def validate_network(net: Network) -> ValidationReport:
    problems = []
    if len(set(net.nodes)) != len(net.nodes):
        problems.append("duplicate node id")
    ids = [e.id for e in net.edges]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        problems.append(f"duplicate edge id {dup!r}")
    nodes = set(net.nodes)
    for e in net.edges:
        for end in (e.tail, e.head):
            if end not in nodes:
                problems.append(f"edge {e.id!r} has dangling endpoint {end!r}")
        if e.capacity < 0:
            problems.append(f"edge {e.id!r} has negative capacity {format_fraction(e.capacity)}")
    _, acyclic = _kahn(net.nodes, net.edges)
    if not acyclic:
        problems.append("cycle")
    return ValidationReport(tuple(problems))


def topological_order(net: Network) -> list[str]:
    order, acyclic = _kahn(net.nodes, net.edges)
    if not acyclic:
        raise CycleError("network contains a cycle")
    return order


def reduce_edge(net: Network, edge_id: str, delta: object) -> Network:
    """Lower one edge's capacity by ``delta``; an edge reduced to zero is dropped."""
    delta = to_fraction(delta)
    e = net.edge(edge_id)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta > e.capacity:
        raise ValueError(f"delta {format_fraction(delta)} exceeds capacity {format_fraction(e.capacity)} of edge {edge_id!r}")
    remaining = e.capacity - delta
    edges = []
    for f in net.edges:
        if f.id != edge_id:
            edges.append(f)
        elif remaining > 0:
            edges.append(replace(f, capacity=remaining))
    return replace(net, edges=tuple(edges))


def cut_capacity(net: Network, source_side: Iterable[str]) -> Cut:
    side = frozenset(source_side)
    crossing = [e for e in net.edges if e.tail in side and e.head not in side]
    return Cut(side, frozenset(e.id for e in crossing), sum((e.capacity for e in crossing), Fraction(0)))


def _check_terminals(net: Network, src: Iterable[str], dst: Iterable[str]) -> tuple[frozenset[str], frozenset[str]]:
    src, dst = frozenset(src), frozenset(dst)
    unknown = (src | dst) - set(net.nodes)
    if unknown:
        raise KeyError(f"unknown nodes {sorted(unknown)}")
    if src & dst:
        raise ValueError("source and sink sets overlap; no cut separates them")
    return src, dst


def enumerate_cuts(net: Network, src: Iterable[str], dst: Iterable[str]) -> list[Cut]:
    """Every cut with ``src`` on the source side and ``dst`` outside it."""
    if len(net.nodes) > MAX_CUT_NODES:
        raise ValueError(f"exhaustive cut enumeration limited to {MAX_CUT_NODES} nodes")
    src, dst = _check_terminals(net, src, dst)
    free = sorted(set(net.nodes) - src - dst)
    cuts = []
    for mask in range(1 << len(free)):
        side = src | {v for i, v in enumerate(free) if (mask >> i) & 1}
        cuts.append(cut_capacity(net, side))
    return cuts


def min_cut_value(net: Network, src: Iterable[str], dst: Iterable[str]) -> Fraction:
    return min(c.capacity for c in enumerate_cuts(net, src, dst))


def max_flow(net: Network, src: Iterable[str], dst: Iterable[str]) -> Fraction:
    """Exact max-flow between node sets via shortest augmenting paths."""
    src, dst = _check_terminals(net, src, dst)
    if not src or not dst:
        return Fraction(0)
    S, T = ("source", None), ("sink", None)
    residual: dict[object, dict[object, Fraction]] = {}

    def add(u: object, v: object, c: Fraction | None) -> None:
        residual.setdefault(u, {})
        residual.setdefault(v, {})
        residual[u][v] = residual[u].get(v, Fraction(0)) + c if c is not None else None
        residual[v].setdefault(u, Fraction(0))

    for e in net.edges:
        if e.capacity > 0:
            add(("n", e.tail), ("n", e.head), e.capacity)
    for v in sorted(src):
        add(S, ("n", v), None)
    for v in sorted(dst):
        add(("n", v), T, None)
    if S not in residual or T not in residual:
        return Fraction(0)

    flow = Fraction(0)
    while True:
        parent: dict[object, object] = {S: None}
        queue = deque([S])
        while queue and T not in parent:
            u = queue.popleft()
            for v, c in residual[u].items():
                if v not in parent and (c is None or c > 0):
                    parent[v] = u
                    queue.append(v)
        if T not in parent:
            return flow
        path = []
        v = T
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        finite = [residual[u][v] for u, v in path if residual[u][v] is not None]
        if not finite:
            # only unbounded arcs means a source node is also a sink node
            raise ValueError("unbounded flow")
        push = min(finite)
        for u, v in path:
            if residual[u][v] is not None:
                residual[u][v] -= push
            if residual[v][u] is not None:
                residual[v][u] += push
        flow += push


def reachable(net: Network, start: Iterable[str], skip_nodes: Iterable[str] = (), skip_edges: Iterable[str] = ()) -> set[str]:
    skip_nodes, skip_edges = set(skip_nodes), set(skip_edges)
    seen = {v for v in start if v not in skip_nodes}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for e in net.edges:
            if e.tail == u and e.id not in skip_edges and e.head not in skip_nodes and e.head not in seen:
                seen.add(e.head)
                stack.append(e.head)
    return seen


def ancestors(net: Network, v: str) -> set[str]:
    rev = Network(net.nodes, tuple(Edge(e.id, e.head, e.tail, e.capacity) for e in net.edges))
    return reachable(rev, [v])


def subnetwork(net: Network, keep: Iterable[str], drop_edges: Iterable[str] = (), name: str = "") -> Network:
    keep = set(keep)
    drop = set(drop_edges)
    nodes = tuple(v for v in net.nodes if v in keep)
    edges = tuple(e for e in net.edges if e.tail in keep and e.head in keep and e.id not in drop)
    return Network(nodes, edges, name or net.name)


def fresh_edge_ids(net: Network, base: str, count: int) -> list[str]:
    taken = {e.id for e in net.edges}
    for suffix in itertools.count():
        tag = "" if suffix == 0 else f"_{suffix}"
        ids = [f"{base}.{i}{tag}" for i in range(count)]
        if not taken & set(ids):
            return ids
    raise AssertionError("unreachable")
