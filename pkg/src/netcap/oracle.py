"""Brute-force ground truth on tiny networks.

Codes are enumerated edge by edge in a fixed order (edges sorted by the
topological position of their tail, then by id); the first edge varies
slowest. ``linear`` mode ranges over GF(2) encoder matrices, ``all`` mode
over every function table. Decoders are never enumerated: a sink can
decode a source with zero error iff its inputs determine that source over
all message tuples, and a linear code that passes this test always admits a
linear decoder.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .gf2 import Gf2Matrix, mat_vec_many
from .linear_code import LinearNetworkCode, bits, check_blocklength, input_layout, message_offsets
from .network import DemandSpec, Network, max_flow, reduce_edge, to_fraction, topological_order
from .regions import DeterministicBC

DEFAULT_BUDGET = 1 << 24
MAX_MESSAGE_BITS = 8
MODES = ("linear", "all")


class BudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"search space of {size} codes exceeds budget {budget}")
        self.size = size
        self.budget = budget


def default_budget() -> int:
    raw = os.environ.get("NETCODE_BUDGET")
    if not raw:
        return DEFAULT_BUDGET
    raw = raw.strip()
    if raw.startswith("2^"):
        return 1 << int(raw[2:])
    return int(raw)


def parse_budget(text: str | int | None) -> int:
    if text is None:
        return default_budget()
    if isinstance(text, int):
        return text
    text = text.strip()
    return 1 << int(text[2:]) if text.startswith("2^") else int(text)


@dataclass(frozen=True)
class GeneralCode:
    """Encoders and decoders as explicit tables indexed by the packed input word."""

    net: Network
    demand: DemandSpec
    n: int
    encoders: Mapping[str, tuple[int, ...]]
    decoders: Mapping[tuple[str, str], tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        check_blocklength(self.net, self.demand, self.n)
        for e in self.net.edges:
            width = sum(b.width for b in self.layout(e.tail))
            table = self.encoders[e.id]
            if len(table) != 1 << width or any(not 0 <= y < 1 << bits(self.n, e.capacity) for y in table):
                raise ValueError(f"encoder table for {e.id!r} is not total on its domain")
        for (v, s), table in self.decoders.items():
            width = sum(b.width for b in self.layout(v))
            if len(table) != 1 << width:
                raise ValueError(f"decoder table for ({v!r}, {s!r}) is not total")

    def layout(self, v: str):
        return input_layout(self.net, self.demand, self.n, v)

    @property
    def message_bits(self) -> int:
        return sum(bits(self.n, r) for r in self.demand.rates.values())

    def demanded_pairs(self) -> list[tuple[str, str]]:
        return [(v, s) for v in self.demand.sinks for s in sorted(self.demand.beta(v))]

    def evaluate_all(self) -> dict[str, np.ndarray]:
        packed = np.arange(1 << self.message_bits, dtype=np.uint64)
        msgs = _message_arrays(self.demand, self.n, packed)
        out = {f"M:{s}": a for s, a in msgs.items()}
        edges: dict[str, np.ndarray] = {}
        for v in topological_order(self.net):
            x = _node_input(self.net, self.demand, self.n, v, msgs, edges)
            for e in self.net.out_edges(v):
                edges[e.id] = np.asarray(self.encoders[e.id], dtype=np.uint64)[x]
        out.update({f"W:{e}": a for e, a in edges.items()})
        for (v, s), table in self.decoders.items():
            x = _node_input(self.net, self.demand, self.n, v, msgs, edges)
            out[f"Mhat:{v}:{s}"] = np.asarray(table, dtype=np.uint64)[x]
        return out

    def with_decoders(self) -> GeneralCode:
        """Attach zero-error decoders wherever the sink's inputs determine the source."""
        vals = self.evaluate_all()
        msgs = {s: vals[f"M:{s}"] for s in self.demand.sources}
        edges = {e.id: vals[f"W:{e.id}"] for e in self.net.edges}
        decoders = {}
        for v, s in self.demanded_pairs():
            x = _node_input(self.net, self.demand, self.n, v, msgs, edges)
            width = sum(b.width for b in self.layout(v))
            table = np.zeros(1 << width, dtype=np.uint64)
            table[x] = msgs[s]
            decoders[(v, s)] = tuple(int(t) for t in table)
        return GeneralCode(self.net, self.demand, self.n, self.encoders, decoders)


def _message_arrays(demand: DemandSpec, n: int, packed: np.ndarray) -> dict[str, np.ndarray]:
    return {
        s: (packed >> np.uint64(off)) & np.uint64((1 << w) - 1) for s, (off, w) in message_offsets(demand, n).items()
    }


def _node_input(net, demand, n, v, msgs, edges, blocks=None) -> np.ndarray:
    if blocks is None:
        blocks = input_layout(net, demand, n, v)
    x = None
    for b in blocks:
        val = msgs[b.id] if b.kind == "source" else edges[b.id]
        part = val << np.uint64(b.offset) if b.offset else val
        x = part if x is None else x | part
    if x is None:
        size = len(next(iter(msgs.values()))) if msgs else 1
        return np.zeros(size, dtype=np.uint64)
    return x


def _determines(x: np.ndarray, m: np.ndarray, width: int) -> bool:
    """True iff equal values of ``x`` always carry equal values of ``m``."""
    if width <= 20:
        table = np.zeros(1 << width, dtype=np.uint64)
        table[x] = m
        return bool(np.array_equal(table[x], m))
    _, first = np.unique(x, return_index=True)
    _, inv = np.unique(x, return_inverse=True)
    return bool(np.array_equal(m[first][inv], m))


def edge_order(net: Network) -> list[str]:
    pos = {v: i for i, v in enumerate(topological_order(net))}
    return [e.id for e in sorted(net.edges, key=lambda e: (pos[e.tail], e.id))]


def _choice_counts(net: Network, demand: DemandSpec, n: int, mode: str) -> list[tuple[str, int, int, int]]:
    """``(edge, input width, output width, number of encoder choices)`` per edge."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    out = []
    for eid in edge_order(net):
        e = net.edge(eid)
        w_in = sum(b.width for b in input_layout(net, demand, n, e.tail))
        w_out = bits(n, e.capacity)
        count = 1 << (w_in * w_out) if mode == "linear" else (1 << w_out) ** (1 << w_in)
        out.append((eid, w_in, w_out, count))
    return out


def search_space_size(net: Network, demand: DemandSpec, n: int, mode: str) -> int:
    return math.prod(c for *_, c in _choice_counts(net, demand, n, mode))


def _encoder(mode: str, index: int, w_in: int, w_out: int):
    if mode == "linear":
        mask = (1 << w_in) - 1
        return Gf2Matrix(w_out, w_in, tuple((index >> (i * w_in)) & mask for i in range(w_out)))
    mask = (1 << w_out) - 1
    return tuple((index >> (x * w_out)) & mask for x in range(1 << w_in))


def _precheck(demand: DemandSpec, n: int, budget: int, size: int) -> None:
    total = sum(bits(n, r) for r in demand.rates.values())
    if total > MAX_MESSAGE_BITS:
        raise ValueError(f"n * sum(R) = {total} exceeds the oracle limit of {MAX_MESSAGE_BITS} bits")
    if size > budget:
        raise BudgetExceeded(size, budget)


def enumerate_codes(
    net: Network, demand: DemandSpec, n: int, mode: str = "linear", budget: int | None = None
) -> Iterator[LinearNetworkCode | GeneralCode]:
    """Every encoder assignment, in deterministic order, without decoders."""
    check_blocklength(net, demand, n)
    budget = default_budget() if budget is None else budget
    counts = _choice_counts(net, demand, n, mode)
    _precheck(demand, n, budget, math.prod(c for *_, c in counts))
    for combo in itertools.product(*(range(c) for *_, c in counts)):
        enc = {eid: _encoder(mode, i, w_in, w_out) for (eid, w_in, w_out, _), i in zip(counts, combo)}
        if mode == "linear":
            yield LinearNetworkCode(net, demand, n, enc)
        else:
            yield GeneralCode(net, demand, n, enc)


class _Search:
    """Depth-first search over encoders with pruning at completed sinks."""

    def __init__(self, net: Network, demand: DemandSpec, n: int, mode: str):
        self.net, self.demand, self.n, self.mode = net, demand, n, mode
        self.counts = _choice_counts(net, demand, n, mode)
        total = sum(bits(n, r) for r in demand.rates.values())
        self.packed = np.arange(1 << total, dtype=np.uint64)
        self.msgs = _message_arrays(demand, n, self.packed)
        tails = {e.id: e.tail for e in net.edges}
        # sinks become checkable once the last of their in-edges is fixed
        depth = {eid: i for i, (eid, *_) in enumerate(self.counts)}
        self.checks: dict[int, list[tuple[str, str]]] = {}
        for v in demand.sinks:
            ins = [e.id for e in net.in_edges(v)]
            at = max((depth[e] for e in ins), default=-1)
            for s in sorted(demand.beta(v)):
                if demand.availability[s] != v:
                    self.checks.setdefault(at, []).append((v, s))
        self.tails = tails
        self.layouts = {v: input_layout(net, demand, n, v) for v in net.nodes}
        self.widths = {v: sum(b.width for b in blocks) for v, blocks in self.layouts.items()}

    def _input(self, v: str, edges: dict) -> np.ndarray:
        return _node_input(self.net, self.demand, self.n, v, self.msgs, edges, self.layouts[v])

    def _ok(self, pairs, edges) -> bool:
        for v, s in pairs:
            x = self._input(v, edges)
            if not _determines(x, self.msgs[s], self.widths[v]):
                return False
        return True

    def find(self, first: range | None = None) -> dict[str, object] | None:
        """Return encoder choices of some code meeting every demand, or ``None``."""
        if not self._ok(self.checks.get(-1, []), {}):
            return None
        if not self.counts:
            return {}
        return self._dfs(0, {}, {}, first)

    def _dfs(self, depth: int, edges: dict, chosen: dict, first: range | None):
        eid, w_in, w_out, count = self.counts[depth]
        x = self._input(self.tails[eid], edges)
        choices = first if depth == 0 and first is not None else range(count)
        pairs = self.checks.get(depth, [])
        seen: set[bytes] = set()
        for i in choices:
            enc = _encoder(self.mode, i, w_in, w_out)
            val = mat_vec_many(enc, x) if self.mode == "linear" else np.asarray(enc, dtype=np.uint64)[x]
            # choices producing the same edge word for every tuple are interchangeable
            key = val.tobytes()
            if key in seen:
                continue
            seen.add(key)
            edges[eid] = val
            chosen[eid] = enc
            if self._ok(pairs, edges):
                if depth + 1 == len(self.counts):
                    return dict(chosen)
                found = self._dfs(depth + 1, edges, chosen, None)
                if found is not None:
                    return found
        edges.pop(eid, None)
        chosen.pop(eid, None)
        return None


def find_code(net: Network, demand: DemandSpec, n: int, mode: str = "linear", budget: int | None = None, first: range | None = None):
    """Some zero-error code for the demand at these rates, or ``None``."""
    check_blocklength(net, demand, n)
    budget = default_budget() if budget is None else budget
    _precheck(demand, n, budget, search_space_size(net, demand, n, mode))
    found = _Search(net, demand, n, mode).find(first)
    if found is None:
        return None
    if mode == "linear":
        from .linear_code import synthesize_decoders

        return synthesize_decoders(LinearNetworkCode(net, demand, n, found))
    return GeneralCode(net, demand, n, found).with_decoders()


def rate_grid(net: Network, demand: DemandSpec, n: int, max_bits: int = MAX_MESSAGE_BITS) -> list[tuple[Fraction, ...]]:
    """Dyadic candidate rate tuples ``r_s in {0, 1/n, ...}``.

    Each source is capped by its smallest max-flow to a sink demanding it
    (sources nobody demands stay at 0) and the total by ``max_bits / n``.
    """
    caps = []
    for s in demand.sources:
        sinks = [v for v in demand.sinks if s in demand.beta(v) and demand.availability[s] != v]
        demanded = any(s in demand.beta(v) for v in demand.sinks)
        if not demanded:
            caps.append(0)
            continue
        flows = [max_flow(net, {demand.availability[s]}, {v}) for v in sinks]
        top = min(flows) if flows else Fraction(max_bits, n)
        caps.append(min(math.floor(top * n), max_bits))
    grid = []
    for combo in itertools.product(*(range(c + 1) for c in caps)):
        if sum(combo) <= max_bits:
            grid.append(tuple(Fraction(c, n) for c in combo))
    return grid


def _cut_limits(net: Network, demand: DemandSpec) -> list[tuple[tuple[int, ...], Fraction]]:
    """Per sink and subset ``A`` of its non-local demands: ``sum_A r <= maxflow(alpha(A), sink)``.

    Any zero-error code obeys these, so tuples outside are skipped unsearched.
    """
    idx = {s: i for i, s in enumerate(demand.sources)}
    out = []
    for v in demand.sinks:
        wanted = sorted(s for s in demand.beta(v) if demand.availability[s] != v)
        for k in range(1, len(wanted) + 1):
            for group in itertools.combinations(wanted, k):
                flow = max_flow(net, {demand.availability[s] for s in group}, {v})
                out.append((tuple(idx[s] for s in group), flow))
    return out


def _worker(args):
    net, demand, n, mode, first = args
    return _Search(net, demand, n, mode).find(first) is not None


def _chunks(count: int, parts: int) -> list[range]:
    parts = max(1, min(parts, count))
    step = -(-count // parts)
    return [range(i, min(i + step, count)) for i in range(0, count, step)]


@dataclass(frozen=True)
class AchievableSet:
    sources: tuple[str, ...]
    n: int
    mode: str
    rates: tuple[tuple[Fraction, ...], ...]
    grid: tuple[tuple[Fraction, ...], ...]


def achievable_set(
    net: Network,
    demand: DemandSpec,
    n: int,
    mode: str = "linear",
    budget: int | None = None,
    workers: int | None = None,
) -> AchievableSet:
    """Grid rate tuples for which some enumerated code decodes every tuple exactly.

    A tuple dominated by one already certified is accepted without search,
    and one violating a cut-set bound is rejected without search.
    Results do not depend on ``workers``.
    """
    budget = default_budget() if budget is None else budget
    workers = workers or os.cpu_count() or 1
    grid = rate_grid(net, demand, n)
    sources = demand.sources
    todo = sorted(grid, key=lambda r: (-sum(r), r))
    found: list[tuple[Fraction, ...]] = []
    limits = _cut_limits(net, demand)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for r in todo:
            if any(all(a >= b for a, b in zip(f, r)) for f in found):
                found.append(r)
                continue
            if any(sum(r[i] for i in group) > flow for group, flow in limits):
                continue
            dem = demand.with_rates(dict(zip(sources, r)))
            size = search_space_size(net, dem, n, mode)
            _precheck(dem, n, budget, size)
            counts = _choice_counts(net, dem, n, mode)
            if pool is None or not counts:
                ok = _Search(net, dem, n, mode).find() is not None
            else:
                tasks = [(net, dem, n, mode, ch) for ch in _chunks(counts[0][3], workers * 4)]
                ok = any(pool.map(_worker, tasks))
            if ok:
                found.append(r)
    finally:
        if pool is not None:
            pool.shutdown()
    return AchievableSet(sources, n, mode, tuple(sorted(found)), tuple(sorted(grid)))


@dataclass(frozen=True)
class GapEntry:
    rate: tuple[Fraction, ...]
    witness: tuple[Fraction, ...]
    gap: Fraction


@dataclass(frozen=True)
class GapReport:
    edge: str
    delta: Fraction
    n: int
    mode: str
    original: AchievableSet
    reduced: AchievableSet
    entries: tuple[GapEntry, ...]

    @property
    def worst_gap(self) -> Fraction:
        return max((e.gap for e in self.entries), default=Fraction(0))

    @property
    def passed(self) -> bool:
        return self.worst_gap <= self.delta


def delta_gap_report(
    net: Network,
    demand: DemandSpec,
    edge_id: str,
    delta: object,
    n: int,
    mode: str = "linear",
    budget: int | None = None,
    workers: int | None = None,
) -> GapReport:
    """For each rate certified on ``net``, the smallest per-dimension loss on the reduced network.

    The gap of ``r`` is ``min over r' of max_s (r_s - r'_s)^+`` with ``r'``
    certified on the reduced network; the claim under test is gap <= delta.
    """
    delta = to_fraction(delta)
    reduced_net = reduce_edge(net, edge_id, delta)
    a = achievable_set(net, demand, n, mode, budget, workers)
    b = achievable_set(reduced_net, demand, n, mode, budget, workers)
    entries = []
    for r in a.rates:
        best, witness = None, None
        for w in b.rates:
            g = max((max(x - y, Fraction(0)) for x, y in zip(r, w)), default=Fraction(0))
            if best is None or g < best:
                best, witness = g, w
        entries.append(GapEntry(r, witness, best))
    return GapReport(edge_id, delta, n, mode, a, b, tuple(entries))


def dbc_zero_error_code(bc: DeterministicBC, rate_bits: Sequence[int]) -> dict[tuple[int, ...], int] | None:
    """Assign distinct inputs to all message tuples so each receiver decodes its own message.

    Messages of receiver ``s`` range over ``2**rate_bits[s]`` values. Returns
    the encoder as ``tuple -> input`` or ``None`` if impossible.
    """
    tuples = list(itertools.product(*(range(1 << b) for b in rate_bits)))
    if len(tuples) > bc.input_size:
        return None
    k = bc.k
    assign: dict[tuple[int, ...], int] = {}
    used: set[int] = set()
    decode: list[dict[int, int]] = [{} for _ in range(k)]

    def place(i: int) -> bool:
        if i == len(tuples):
            return True
        t = tuples[i]
        for x in range(bc.input_size):
            if x in used:
                continue
            added = []
            ok = True
            for s in range(k):
                y = bc.functions[s][x]
                prev = decode[s].get(y)
                if prev is None:
                    decode[s][y] = t[s]
                    added.append((s, y))
                elif prev != t[s]:
                    ok = False
                    break
            if ok:
                used.add(x)
                assign[t] = x
                if place(i + 1):
                    return True
                used.discard(x)
                del assign[t]
            for s, y in added:
                del decode[s][y]
        return False

    return dict(assign) if place(0) else None


def dbc_zero_error_rates(bc: DeterministicBC) -> list[tuple[int, ...]]:
    """Every integer-bit rate vector with a zero-error single-use code."""
    top = int(math.floor(math.log2(bc.input_size)))
    out = []
    for combo in itertools.product(range(top + 1), repeat=bc.k):
        if sum(combo) <= top and dbc_zero_error_code(bc, combo) is not None:
            out.append(combo)
    return out
