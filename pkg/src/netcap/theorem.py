"""Check the single-edge removal argument for multiple-unicast networks
whose sources reach their sinks only through a relay node ``a`` or one edge
``e``.

Given a concrete code, the verifier evaluates every quantity the argument
uses at the code's own blocklength: the MAC from the sources into ``a``,
the choice of a fixed word on ``e``, and the deterministic broadcast
channel from ``a``'s outputs to the sinks once ``e`` is frozen.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .info import (
    TOL,
    DistributionTable,
    binary_entropy,
    conditional_entropy,
    entropy,
    induced_distribution,
    mutual_information,
)
from .cutset import NON_OVERLAPPING, cutset_region
from .network import DemandSpec, Network, ancestors, reachable, subnetwork
from .regions import (
    RateRegion,
    dbc_from_table,
    dbc_region,
    intersect,
    mac_region_from_code,
    margins,
    r_mac_vector,
    region_membership,
    shift_region,
)


class StructureError(ValueError):
    pass


def check_structure(net: Network, demand: DemandSpec, a: str, edge_id: str) -> bool:
    """True iff deleting node ``a`` and edge ``edge_id`` cuts every source from every sink."""
    if a not in net.nodes:
        raise KeyError(f"unknown node {a!r}")
    net.edge(edge_id)
    start = set(demand.availability.values())
    reach = reachable(net, start, skip_nodes={a}, skip_edges={edge_id})
    return not (reach & set(demand.sinks))


def unicast_sinks(demand: DemandSpec) -> dict[str, str]:
    """``source -> sink`` for a k-unicast demand; raises otherwise."""
    sink_of: dict[str, str] = {}
    for v in demand.sinks:
        wanted = demand.beta(v)
        if len(wanted) != 1:
            raise StructureError(f"sink {v!r} demands {len(wanted)} sources; expected exactly one")
        (s,) = wanted
        if s in sink_of:
            raise StructureError(f"source {s!r} is demanded by more than one sink")
        sink_of[s] = v
    for s in demand.sources:
        if s not in sink_of:
            raise StructureError(f"source {s!r} is not demanded")
        if demand.availability[s] == sink_of[s]:
            raise StructureError(f"source {s!r} is available at its own sink")
    return sink_of


@dataclass(frozen=True)
class TheoremInstance:
    code: object  # LinearNetworkCode or GeneralCode
    node: str
    edge: str

    @property
    def net(self) -> Network:
        return self.code.net

    @property
    def demand(self) -> DemandSpec:
        return self.code.demand

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def delta(self) -> Fraction:
        return self.net.edge(self.edge).capacity

    def inputs_of_node(self) -> list[str]:
        return [f"M:{s}" for s in self.demand.sigma(self.node)] + [f"W:{e.id}" for e in self.net.in_edges(self.node)]

    def outputs_of_node(self) -> list[str]:
        return [f"W:{e.id}" for e in self.net.out_edges(self.node)]


@dataclass(frozen=True)
class Prepared:
    """The code's distribution after freezing the sources with ``R_s <= delta``."""

    table: DistributionTable
    active: tuple[str, ...]
    constant: tuple[str, ...]
    sink_of: dict[str, str]
    p_err: dict[str, Fraction]
    eps: float

    def rate(self, inst: TheoremInstance, s: str) -> Fraction:
        return inst.demand.rates[s] if s in self.active else Fraction(0)


def prepare(inst: TheoremInstance) -> Prepared:
    if not check_structure(inst.net, inst.demand, inst.node, inst.edge):
        raise StructureError(f"node {inst.node!r} and edge {inst.edge!r} do not separate sources from sinks")
    sink_of = unicast_sinks(inst.demand)
    local = inst.demand.sigma(inst.node)
    if local:
        raise StructureError(f"sources {list(local)} sit at the relay node {inst.node!r}")
    missing = [s for s, v in sink_of.items() if (v, s) not in inst.code.decoders]
    if missing:
        raise StructureError(f"code has no decoder for sources {missing}")
    d = induced_distribution(inst.code)
    delta = inst.delta
    constant = tuple(s for s in inst.demand.sources if inst.demand.rates[s] <= delta)
    active = tuple(s for s in inst.demand.sources if s not in constant)
    if constant:
        d = d.condition({f"M:{s}": 0 for s in constant})
    p_err = {}
    for s in active:
        mi, hi = d.index(f"M:{s}"), d.index(f"Mhat:{sink_of[s]}:{s}")
        p_err[s] = sum((p for o, p in d.probs.items() if o[mi] != o[hi]), Fraction(0))
    eps = max((max(float(p), binary_entropy(p)) for p in p_err.values()), default=0.0)
    return Prepared(d, active, constant, sink_of, p_err, eps)


@dataclass(frozen=True)
class MacSourceLine:
    source: str
    mutual_information: float
    lower_bound: float

    @property
    def margin(self) -> float:
        return self.mutual_information - self.lower_bound


@dataclass(frozen=True)
class MacStepReport:
    r_mac: tuple[float, ...]
    region_margins: tuple[tuple[tuple[str, ...], float], ...]
    per_source: tuple[MacSourceLine, ...]
    eps: float

    @property
    def in_region(self) -> bool:
        return all(m >= -TOL for _, m in self.region_margins)

    @property
    def passed(self) -> bool:
        return self.in_region and all(x.margin >= -TOL for x in self.per_source)


def verify_mac_step(inst: TheoremInstance, prep: Prepared | None = None) -> MacStepReport:
    """``r_mac`` lies in the MAC region, and each ``I(M_s; W_i)`` is at least
    ``n(R_s - delta) - n R_s eps - eps``."""
    prep = prep or prepare(inst)
    n, delta, eps = inst.n, inst.delta, prep.eps
    msgs = [f"M:{s}" for s in prep.active]
    w_i = [w for w in inst.inputs_of_node() if w not in msgs]
    if not msgs:
        return MacStepReport((), (), (), eps)
    if w_i:
        region = mac_region_from_code(prep.table, msgs, w_i)
        r_mac = r_mac_vector(prep.table, msgs, w_i)
        region_m = tuple((tuple(msgs[i] for i in q.subset), float(m)) for q, m in margins(region, r_mac))
    else:
        r_mac = [0.0] * len(msgs)
        region_m = ()
    lines = []
    for s, i in zip(prep.active, r_mac):
        r = float(inst.demand.rates[s])
        lines.append(MacSourceLine(s, i, n * (r - float(delta)) - n * r * eps - eps))
    return MacStepReport(tuple(r_mac), region_m, tuple(lines), eps)


@dataclass(frozen=True)
class WeChoice:
    value: int
    entropy: float  # H(Mhat | W_e = value)
    average: float  # H(Mhat | W_e)
    lower_bound: float

    @property
    def passed(self) -> bool:
        return self.entropy >= self.average - TOL and self.entropy >= self.lower_bound - TOL


def choose_w_e(d: DistributionTable, w_e: str, outputs: list[str], lower_bound: float = float("-inf")) -> WeChoice:
    """The edge word leaving the most uncertainty in the reconstructions; ties go to the smallest word."""
    best_value, best_h = None, None
    for (w,) in sorted(d.marginal([w_e])):
        h = entropy(d.condition({w_e: w}), outputs)
        if best_h is None or h > best_h + 1e-12:
            best_value, best_h = w, h
    avg = conditional_entropy(d, outputs, [w_e]) if outputs else 0.0
    return WeChoice(best_value, best_h, avg, lower_bound)


@dataclass(frozen=True)
class BcSubsetLine:
    subset: tuple[str, ...]
    entropy: float  # H(Mhat_A | W_e = w_e)
    target: float  # sum over A of n (R_s - delta)^+
    chain_bound: float

    @property
    def margin(self) -> float:
        return self.entropy - self.target

    @property
    def chain_margin(self) -> float:
        return self.entropy - self.chain_bound


@dataclass(frozen=True)
class BcStepReport:
    w_e: int
    lines: tuple[BcSubsetLine, ...]
    exact: bool = True  # zero-error code: the uncorrected target must hold too

    @property
    def passed(self) -> bool:
        chain = all(x.chain_margin >= -TOL for x in self.lines)
        return chain and (not self.exact or all(x.margin >= -TOL for x in self.lines))


def verify_bc_step(inst: TheoremInstance, w_e: int, prep: Prepared | None = None) -> BcStepReport:
    """With ``W_e`` frozen at ``w_e``, ``n (R - delta)^+`` fits the broadcast region from ``a``."""
    prep = prep or prepare(inst)
    n, delta, eps = inst.n, inst.delta, prep.eps
    k = len(prep.active)
    cond = prep.table.condition({f"W:{inst.edge}": w_e})
    outs = [f"Mhat:{prep.sink_of[s]}:{s}" for s in prep.active]
    if not outs:
        return BcStepReport(w_e, (), eps == 0)
    w_o = inst.outputs_of_node()
    bc, _ = dbc_from_table(cond, w_o, outs)
    region = dbc_region(bc, names=prep.active)
    total = sum(float(prep.rate(inst, s)) for s in prep.active)
    target = [n * max(float(inst.demand.rates[s] - delta), 0.0) for s in prep.active]
    lines = []
    for q, _ in margins(region, target):
        sub = tuple(prep.active[i] for i in q.subset)
        t = sum(target[i] for i in q.subset)
        chain = n * sum(float(inst.demand.rates[s]) for s in sub) - n * total * eps - k * eps - n * float(delta)
        lines.append(BcSubsetLine(sub, float(q.bound), t, chain))
    return BcStepReport(w_e, tuple(lines), eps == 0)


@dataclass(frozen=True)
class TheoremReport:
    node: str
    edge: str
    delta: Fraction
    n: int
    constant_sources: tuple[str, ...]
    p_err: dict[str, Fraction]
    eps: float
    mac: MacStepReport
    w_e: WeChoice
    bc: BcStepReport
    bc_in_region: bool

    @property
    def passed(self) -> bool:
        return self.mac.passed and self.w_e.passed and self.bc.passed and (self.bc_in_region or not self.bc.exact)


def verify_theorem(inst: TheoremInstance) -> TheoremReport:
    prep = prepare(inst)
    n, delta, eps = inst.n, inst.delta, prep.eps
    mac = verify_mac_step(inst, prep)
    outs = [f"Mhat:{prep.sink_of[s]}:{s}" for s in prep.active]
    k = len(prep.active)
    total = sum(float(prep.rate(inst, s)) for s in prep.active)
    lb = (1 - eps) * n * total - k * eps - n * float(delta)
    choice = choose_w_e(prep.table.project([f"W:{inst.edge}"] + outs), f"W:{inst.edge}", outs, lb)
    bc = verify_bc_step(inst, choice.value, prep)
    if outs:
        cond = prep.table.condition({f"W:{inst.edge}": choice.value})
        bcc, _ = dbc_from_table(cond, inst.outputs_of_node(), outs)
        target = [n * max(inst.demand.rates[s] - delta, Fraction(0)) for s in prep.active]
        in_region = region_membership(dbc_region(bcc), [float(t) for t in target])
    else:
        in_region = True
    return TheoremReport(inst.node, inst.edge, delta, n, prep.constant, prep.p_err, eps, mac, choice, bc, in_region)


def mac_membership_holds(code, node: str) -> bool:
    """``r_mac`` is in the MAC region for any code: only independence of messages is used."""
    d = induced_distribution(code)
    msgs = [f"M:{s}" for s in code.demand.sources]
    w_i = [f"W:{e.id}" for e in code.net.in_edges(node)]
    if not w_i or not msgs:
        return True
    region = mac_region_from_code(d, msgs, w_i)
    return region_membership(region, r_mac_vector(d, msgs, w_i))


def mutual_information_into(code, node: str, source: str) -> float:
    d = induced_distribution(code)
    return mutual_information(d, f"M:{source}", [f"W:{e.id}" for e in code.net.in_edges(node)])


@dataclass(frozen=True)
class Decomposition:
    upstream: Network  # sources -> a
    upstream_demand: DemandSpec
    downstream: Network  # a -> sinks
    downstream_demand: DemandSpec
    delta: Fraction


def decompose(net: Network, demand: DemandSpec, a: str, edge_id: str) -> Decomposition:
    """Split at ``a`` after deleting ``edge_id``: ancestors of ``a`` carry a
    multicast of every source to ``a``; descendants of ``a`` carry all
    sources from ``a`` to the original sinks."""
    if not check_structure(net, demand, a, edge_id):
        raise StructureError(f"node {a!r} and edge {edge_id!r} do not separate sources from sinks")
    delta = net.edge(edge_id).capacity
    without = subnetwork(net, net.nodes, drop_edges=[edge_id])
    up = ancestors(without, a)
    down = reachable(without, [a])
    if up & down != {a}:
        raise StructureError("upstream and downstream parts overlap")
    for s, v in demand.availability.items():
        if v not in up:
            raise StructureError(f"source {s!r} cannot reach {a!r} without {edge_id!r}")
    for v in demand.sinks:
        if v not in down:
            raise StructureError(f"sink {v!r} is not reachable from {a!r}")
    n1 = subnetwork(without, up, name=f"{net.name}-upstream")
    d1 = DemandSpec(demand.rates, demand.availability, {a: set(demand.sources)})
    n2 = subnetwork(without, down, name=f"{net.name}-downstream")
    d2 = DemandSpec(demand.rates, {s: a for s in demand.sources}, demand.demands)
    return Decomposition(n1, d1, n2, d2, delta)


def corollary_outer_bound(net: Network, demand: DemandSpec, a: str, edge_id: str) -> RateRegion:
    """``{R + delta 1 : R in R1 and R2}`` with ``R1`` the cut-set region of the
    upstream multicast and ``R2`` that of the downstream non-overlapping part."""
    dec = decompose(net, demand, a, edge_id)
    r1 = cutset_region(dec.upstream, dec.upstream_demand).as_rate_region()
    c2 = cutset_region(dec.downstream, dec.downstream_demand)
    if c2.demand_type != NON_OVERLAPPING:
        raise StructureError(f"downstream demand is {c2.demand_type}, not non-overlapping")
    return shift_region(intersect(r1, c2.as_rate_region()), dec.delta)
