"""Cut-set regions for demand types whose capacity they characterize.

Supported demand types, detected from the demand structure (first match
wins, so a single-source single-sink demand is a multicast):

``multicast``
    one source, every sink demands it.
``multiSourceMulticast``
    several sources, every sink demands all of them.
``singleSourceNonOverlapping``
    all sources at one node, the sinks' demand sets pairwise disjoint.
``singleSourceNonOverlappingPlusMulticast``
    all sources at one node, some sinks demand everything and the remaining
    sinks' demand sets are pairwise disjoint.

Constraints are per sink ``v``: ``sum_{s in A} R_s <= maxflow(alpha(A), v)``.
For the multicast types ``A`` ranges over every nonempty subset of the
sources not already available at ``v``; with all sources at one node the
flow does not depend on ``A`` so only the full demanded set is listed.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .network import DemandSpec, Network, cut_capacity, enumerate_cuts, max_flow, reduce_edge, to_fraction
from .regions import Inequality, RateRegion

MULTICAST = "multicast"
MULTI_SOURCE_MULTICAST = "multiSourceMulticast"
NON_OVERLAPPING = "singleSourceNonOverlapping"
NON_OVERLAPPING_PLUS_MULTICAST = "singleSourceNonOverlappingPlusMulticast"
GENERAL = "general"


class UnsupportedDemandError(ValueError):
    pass


@dataclass(frozen=True)
class CutConstraint:
    sources: tuple[str, ...]
    sink: str
    bound: Fraction


@dataclass(frozen=True)
class CutsetRegion:
    demand_type: str
    sources: tuple[str, ...]
    constraints: tuple[CutConstraint, ...]

    @property
    def tight(self) -> bool:
        return self.demand_type != GENERAL

    def as_rate_region(self) -> RateRegion:
        idx = {s: i for i, s in enumerate(self.sources)}
        ineqs = tuple(
            Inequality(tuple(sorted(idx[s] for s in c.sources)), c.bound, f"maxflow({','.join(c.sources)}->{c.sink})")
            for c in self.constraints
        )
        return RateRegion(len(self.sources), ineqs, names=self.sources)


def _pairwise_disjoint(sets: Sequence[frozenset[str]]) -> bool:
    seen: set[str] = set()
    for s in sets:
        if seen & s:
            return False
        seen |= s
    return True


def classify_demand(demand: DemandSpec) -> str:
    sources = frozenset(demand.sources)
    sets = [demand.beta(v) for v in demand.sinks]
    if not sets:
        raise UnsupportedDemandError("no node demands anything")
    if all(s == sources for s in sets):
        return MULTICAST if len(sources) == 1 else MULTI_SOURCE_MULTICAST
    if len(set(demand.availability.values())) == 1:
        if _pairwise_disjoint(sets):
            return NON_OVERLAPPING
        partial = [s for s in sets if s != sources]
        if len(partial) < len(sets) and _pairwise_disjoint(partial):
            return NON_OVERLAPPING_PLUS_MULTICAST
    raise UnsupportedDemandError("demand does not match a type with a tight cut-set characterization")


def _constraints(net: Network, demand: DemandSpec, per_subset: bool) -> list[CutConstraint]:
    out = []
    for v in demand.sinks:
        wanted = sorted(s for s in demand.beta(v) if demand.availability[s] != v)
        if not wanted:
            continue
        groups = []
        if per_subset:
            for mask in range(1, 1 << len(wanted)):
                groups.append(tuple(s for i, s in enumerate(wanted) if (mask >> i) & 1))
        else:
            groups.append(tuple(wanted))
        for group in groups:
            src = {demand.availability[s] for s in group}
            out.append(CutConstraint(group, v, max_flow(net, src, {v})))
    return out


def cutset_region(net: Network, demand: DemandSpec, allow_general: bool = False) -> CutsetRegion:
    """Cut-set region of ``(net, demand)``.

    With ``allow_general`` an unsupported demand yields the per-sink cut-set
    outer bound (all subsets of each sink's demand), flagged as not tight.
    """
    demand.check_against(net)
    try:
        kind = classify_demand(demand)
    except UnsupportedDemandError:
        if not allow_general:
            raise
        warnings.warn("cut-set bound is only an outer bound for this demand type", stacklevel=2)
        kind = GENERAL
    per_subset = kind in (MULTICAST, MULTI_SOURCE_MULTICAST, GENERAL)
    return CutsetRegion(kind, demand.sources, tuple(_constraints(net, demand, per_subset)))


def _rates(region: CutsetRegion, r: Sequence[object] | Mapping[str, object]) -> dict[str, Fraction]:
    if isinstance(r, Mapping):
        if set(r) != set(region.sources):
            raise ValueError("rate vector keys do not match the sources")
        return {s: to_fraction(r[s]) for s in region.sources}
    if len(r) != len(region.sources):
        raise ValueError(f"rate vector has {len(r)} entries, expected {len(region.sources)}")
    return {s: to_fraction(x) for s, x in zip(region.sources, r)}


def region_membership(region: CutsetRegion, r: Sequence[object] | Mapping[str, object]) -> bool:
    rates = _rates(region, r)
    return all(sum((rates[s] for s in c.sources), Fraction(0)) <= c.bound for c in region.constraints)


def sample_region_points(region: CutsetRegion, count: int, rng: random.Random, grain: int = 12) -> list[tuple[Fraction, ...]]:
    """Rational points of the region: random directions scaled to a random fraction of the boundary.

    The origin and boundary points (scale 1) are both reachable.
    """
    k = len(region.sources)
    idx = {s: i for i, s in enumerate(region.sources)}
    points = []
    for _ in range(count):
        d = [Fraction(rng.randint(0, grain)) for _ in range(k)]
        limits = []
        for c in region.constraints:
            load = sum((d[idx[s]] for s in c.sources), Fraction(0))
            if load > 0:
                limits.append(c.bound / load)
        t = min(limits) if limits else Fraction(1)
        u = Fraction(rng.randint(0, grain), grain)
        points.append(tuple(x * t * u for x in d))
    return points


@dataclass(frozen=True)
class RobustnessReport:
    edge: str
    delta: Fraction
    bound_drops: tuple[tuple[CutConstraint, Fraction], ...]  # (constraint in N, bound in N')
    probe_failures: tuple[tuple[Fraction, ...], ...]
    probes: int

    @property
    def passed(self) -> bool:
        return not self.probe_failures and all(after >= c.bound - self.delta for c, after in self.bound_drops)


def check_delta_robustness(
    net: Network,
    demand: DemandSpec,
    edge_id: str,
    delta: object,
    probes: Sequence[Sequence[object]] | None = None,
    rng: random.Random | None = None,
    n_probes: int = 100,
) -> RobustnessReport:
    """Reducing ``edge_id`` by ``delta`` lowers every bound by at most ``delta``.

    Each probe inside the original region must map to ``(r - delta)^+``
    inside the reduced region. Probes default to ``n_probes`` sampled points.
    """
    delta = to_fraction(delta)
    before = cutset_region(net, demand)
    after = cutset_region(reduce_edge(net, edge_id, delta), demand)
    drops = tuple(zip(before.constraints, (c.bound for c in after.constraints)))
    if probes is None:
        probes = sample_region_points(before, n_probes, rng or random.Random(0))
    failures = []
    for p in probes:
        r = [to_fraction(x) for x in p]
        if not region_membership(before, r):
            continue
        target = [max(x - delta, Fraction(0)) for x in r]
        if not region_membership(after, target):
            failures.append(tuple(r))
    return RobustnessReport(edge_id, delta, drops, tuple(failures), len(probes))


@dataclass(frozen=True)
class CutDropReport:
    cuts: int
    violations: tuple[frozenset[str], ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def check_cut_drops(net: Network, edge_id: str, delta: object, src: Sequence[str], dst: Sequence[str]) -> CutDropReport:
    """Every ``src``/``dst`` cut of the reduced network loses at most ``delta``."""
    delta = to_fraction(delta)
    reduced = reduce_edge(net, edge_id, delta)
    bad = []
    cuts = enumerate_cuts(net, src, dst)
    for c in cuts:
        if cut_capacity(reduced, c.source_side).capacity < c.capacity - delta:
            bad.append(c.source_side)
    return CutDropReport(len(cuts), tuple(bad))
