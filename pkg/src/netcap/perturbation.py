"""Running a linear code after one edge loses capacity.

Sources are restricted to messages that their own transfer block maps to
zero on the removed link. Because the restriction is a product of
per-source kernels, no source needs to know what the others send, and the
link carries the all-zero word, so its consumers can drop it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np

from .gf2 import Gf2Matrix, hstack, kernel_basis, left_inverse, mat_mul, mat_vec_many
from .linear_code import (
    LinearNetworkCode,
    bits,
    check_decodable,
    compute_transfer_matrices,
    evaluate_all,
    extend_blocklength,
    input_layout,
    message_offsets,
)
from .network import DemandSpec, Network, fresh_edge_ids, reduce_edge, to_fraction

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KernelRestriction:
    edge: str
    n: int
    bases: Mapping[str, tuple[int, ...]]
    injections: Mapping[str, Gf2Matrix]

    @property
    def dims(self) -> dict[str, int]:
        return {s: len(b) for s, b in self.bases.items()}

    @property
    def rates(self) -> dict[str, Fraction]:
        return {s: Fraction(len(b), self.n) for s, b in self.bases.items()}


def kernel_restrict(code: LinearNetworkCode, edge_id: str) -> KernelRestriction:
    code.net.edge(edge_id)
    tm = compute_transfer_matrices(code)
    bases, inj = {}, {}
    for s in code.demand.sources:
        a = tm.a(s, edge_id)
        basis = tuple(kernel_basis(a))
        bases[s] = basis
        inj[s] = Gf2Matrix.from_columns(basis, a.ncols)
    return KernelRestriction(edge_id, code.n, bases, inj)


def _transform(
    code: LinearNetworkCode,
    new_net: Network,
    new_demand: DemandSpec,
    source_maps: Mapping[str, Gf2Matrix],
    edge_maps: Mapping[str, tuple[str, Gf2Matrix]],
    decoder_post: Mapping[str, Gf2Matrix],
) -> LinearNetworkCode:
    """Rewrite a code for a new network by linear substitutions.

    ``source_maps[s]`` (old width x new width) expresses the old message of
    ``s`` in terms of the new one. ``edge_maps[new_id] = (old_id, P)`` says
    the new edge carries ``P @ W_old``; the row selections derived from one
    old edge must be complementary, and any old rows not covered are the
    constant zero. ``decoder_post[s]`` maps an old reconstruction of ``s``
    to a new one.
    """
    n = code.n

    def column_map(v: str) -> Gf2Matrix:
        old_blocks = code.layout(v)
        new_blocks = input_layout(new_net, new_demand, n, v)
        cols = []
        for nb in new_blocks:
            col_parts = []
            for ob in old_blocks:
                if nb.kind == "source" and ob.kind == "source" and nb.id == ob.id:
                    blk = source_maps[ob.id] if ob.id in source_maps else Gf2Matrix.identity(ob.width)
                elif nb.kind == "edge" and ob.kind == "edge" and edge_maps[nb.id][0] == ob.id:
                    blk = edge_maps[nb.id][1].transpose()
                else:
                    blk = Gf2Matrix.zeros(ob.width, nb.width)
                col_parts.append(blk)
            # stack old blocks vertically: rows follow the old layout
            data = tuple(r for p in col_parts for r in p.data)
            cols.append(Gf2Matrix(sum(p.nrows for p in col_parts), nb.width, data))
        width_old = sum(b.width for b in old_blocks)
        return hstack(cols, nrows=width_old)

    maps = {v: column_map(v) for v in new_net.nodes}
    encoders = {}
    for e in new_net.edges:
        old_id, p = edge_maps[e.id]
        encoders[e.id] = mat_mul(mat_mul(p, code.encoders[old_id]), maps[e.tail])
    decoders = {}
    for (v, s), dec in code.decoders.items():
        post = decoder_post[s] if s in decoder_post else Gf2Matrix.identity(dec.nrows)
        decoders[(v, s)] = mat_mul(mat_mul(post, dec), maps[v])
    return LinearNetworkCode(new_net, new_demand, n, encoders, decoders)


def _identity_edge_maps(net: Network, n: int) -> dict[str, tuple[str, Gf2Matrix]]:
    return {e.id: (e.id, Gf2Matrix.identity(bits(n, e.capacity))) for e in net.edges}


def split_parallel(net: Network, edge_id: str, delta: object) -> tuple[Network, str, str]:
    """Replace an edge by parallel links of capacities ``C_e - delta`` and ``delta``.

    Returns the new network and the ids of the two links.
    """
    delta = to_fraction(delta)
    e = net.edge(edge_id)
    if not 0 < delta < e.capacity:
        raise ValueError(f"split requires 0 < delta < {e.capacity}, got {delta}")
    main_id, delta_id = fresh_edge_ids(net, edge_id, 2)
    edges = []
    for f in net.edges:
        if f.id == edge_id:
            edges.append(replace(f, id=main_id, capacity=e.capacity - delta))
            edges.append(replace(f, id=delta_id, capacity=delta))
        else:
            edges.append(f)
    return replace(net, edges=tuple(edges)), main_id, delta_id


def lift_to_split(code: LinearNetworkCode, edge_id: str, delta: object) -> tuple[LinearNetworkCode, str, str]:
    """Carry a code over to :func:`split_parallel`'s network.

    Bit positions ``0 .. n(C_e - delta) - 1`` of the edge go to the first
    link and the rest to the second.
    """
    delta = to_fraction(delta)
    split_net, main_id, delta_id = split_parallel(code.net, edge_id, delta)
    width = bits(code.n, code.net.edge(edge_id).capacity)
    w_main = bits(code.n, code.net.edge(edge_id).capacity - delta)
    full = Gf2Matrix.identity(width)
    edge_maps = _identity_edge_maps(code.net, code.n)
    del edge_maps[edge_id]
    edge_maps[main_id] = (edge_id, full.row_slice(0, w_main))
    edge_maps[delta_id] = (edge_id, full.row_slice(w_main, width))
    lifted = _transform(code, split_net, code.demand, {}, edge_maps, {})
    return lifted, main_id, delta_id


def build_restricted_code(code: LinearNetworkCode, kr: KernelRestriction) -> LinearNetworkCode:
    """The code on the network without ``kr.edge``, at the restricted rates.

    New source messages are coordinates in the kernel basis; the restricted
    edge's consumers see the constant zero word, which contributes nothing.
    """
    if kr.n != code.n:
        raise ValueError("restriction was computed at a different blocklength")
    cap = code.net.edge(kr.edge).capacity
    new_net = reduce_edge(code.net, kr.edge, cap)
    new_demand = code.demand.with_rates(kr.rates)
    edge_maps = _identity_edge_maps(new_net, code.n)
    post = {s: left_inverse(b) for s, b in kr.injections.items()}
    return _transform(code, new_net, new_demand, dict(kr.injections), edge_maps, post)


def rename_edge(code: LinearNetworkCode, old: str, new: str) -> LinearNetworkCode:
    net = code.net
    edges = tuple(replace(e, id=new) if e.id == old else e for e in net.edges)
    new_net = replace(net, edges=edges)
    edge_maps = _identity_edge_maps(net, code.n)
    edge_maps[new] = edge_maps.pop(old)
    return _transform(code, new_net, code.demand, {}, edge_maps, {})


def injection_matrix(code: LinearNetworkCode, kr: KernelRestriction) -> Gf2Matrix:
    """Block-diagonal map from packed restricted tuples to packed original tuples."""
    offsets = message_offsets(code.demand, code.n)
    total = code.message_bits
    data = [0] * total
    shift = 0
    for s in code.demand.sources:
        off, w = offsets[s]
        b = kr.injections[s]
        for i, row in enumerate(b.data):
            data[off + i] |= row << shift
        shift += b.ncols
    return Gf2Matrix(total, shift, tuple(data))


@dataclass(frozen=True)
class RestrictionCheck:
    tuples: int
    zero_on_edge: bool
    decodable_preserved: dict[tuple[str, str], bool]
    matches_original: bool

    @property
    def ok(self) -> bool:
        return self.zero_on_edge and self.matches_original and all(self.decodable_preserved.values())


def check_restriction(
    code: LinearNetworkCode, kr: KernelRestriction, restricted: LinearNetworkCode, aliases: Mapping[str, str] | None = None
) -> RestrictionCheck:
    """Exhaustively run every restricted tuple through both codes.

    Checks that the removed link carries zero, that surviving edges carry the
    same words in both codes, and that each pair decodable in the original
    code still decodes the restricted message. ``aliases`` maps restricted
    edge ids to the original code's ids where they differ.
    """
    aliases = aliases or {}
    inj = injection_matrix(code, kr)
    if inj.ncols > 24:
        raise ValueError("too many restricted message bits for exhaustive checking")
    u = np.arange(1 << inj.ncols, dtype=np.uint64)
    orig = evaluate_all(code, mat_vec_many(inj, u))
    new = evaluate_all(restricted, u)
    zero = bool(not np.any(orig[f"W:{kr.edge}"]))
    same = all(np.array_equal(orig[f"W:{aliases.get(e.id, e.id)}"], new[f"W:{e.id}"]) for e in restricted.net.edges)
    verdict = check_decodable(code)
    preserved = {}
    for (v, s), ok in verdict.items():
        if ok:
            preserved[(v, s)] = bool(np.array_equal(new[f"Mhat:{v}:{s}"], new[f"M:{s}"]))
    return RestrictionCheck(len(u), zero, preserved, same)


@dataclass(frozen=True)
class SourceRate:
    source: str
    original: Fraction
    restricted: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.restricted >= self.bound


@dataclass(frozen=True)
class RateLossReport:
    edge: str
    delta: Fraction
    n: int
    per_source: tuple[SourceRate, ...]
    restricted_code: LinearNetworkCode
    restriction: KernelRestriction | None = None
    check: RestrictionCheck | None = field(default=None)

    @property
    def passed(self) -> bool:
        ok = all(r.ok for r in self.per_source)
        if self.check is not None:
            ok = ok and self.check.ok
        return ok


def restrict_for_reduction(code: LinearNetworkCode, edge_id: str, delta: object):
    """Return ``(code_used, restriction, restricted_code)`` for one reduction.

    The blocklength is multiplied up when ``n*delta`` is fractional. For
    ``0 < delta < C_e`` the edge is split first and the ``delta`` link is the
    one restricted; the surviving link keeps the original edge id so the
    restricted code lives on exactly ``reduce_edge(net, edge_id, delta)``.
    """
    delta = to_fraction(delta)
    cap = code.net.edge(edge_id).capacity
    if delta < 0 or delta > cap:
        raise ValueError(f"delta {delta} outside [0, {cap}] for edge {edge_id!r}")
    factor = (code.n * delta).denominator
    code = extend_blocklength(code, factor)
    if delta == 0:
        return code, None, code
    if delta == cap:
        kr = kernel_restrict(code, edge_id)
        return code, kr, build_restricted_code(code, kr)
    lifted, main_id, delta_id = lift_to_split(code, edge_id, delta)
    kr = kernel_restrict(lifted, delta_id)
    restricted = rename_edge(build_restricted_code(lifted, kr), main_id, edge_id)
    return lifted, kr, restricted


def verify_rate_loss(code: LinearNetworkCode, edge_id: str, delta: object, simulate: bool = False) -> RateLossReport:
    delta = to_fraction(delta)
    used, kr, restricted = restrict_for_reduction(code, edge_id, delta)
    rates = kr.rates if kr is not None else dict(code.demand.rates)
    per_source = []
    for s in code.demand.sources:
        r = code.demand.rates[s]
        per_source.append(SourceRate(s, r, rates[s], max(r - delta, Fraction(0))))
    check = None
    if simulate and kr is not None:
        aliases = {}
        if not used.net.has_edge(edge_id):
            # split case: the surviving link was renamed back to edge_id
            (main,) = [e.id for e in used.net.edges if e.id.startswith(f"{edge_id}.") and e.id != kr.edge]
            aliases[edge_id] = main
        check = check_restriction(used, kr, restricted, aliases)
    report = RateLossReport(edge_id, delta, used.n, tuple(per_source), restricted, kr, check)
    if not all(r.ok for r in per_source):
        log.error("restricted rate below (R - delta)+ on edge %s; this contradicts rank-nullity", edge_id)
    return report
