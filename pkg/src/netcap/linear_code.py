"""Blocklength-n GF(2) linear network codes.

Input bit layout at a node ``v`` (shared by every encoder on ``Out(v)`` and
every decoder at ``v``): the sources of ``sigma(v)`` ascending by id, each
``n*R_s`` bits wide, followed by the edges of ``In(v)`` ascending by id, each
``n*C_e`` bits wide. Block 0 occupies the lowest bit positions.

Message tuples are packed the same way: sources ascending by id, so a tuple
is a single integer of ``sum_s n*R_s`` bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .gf2 import Gf2Matrix, hstack, mat_mul, mat_vec, mat_vec_many, solve_left, vstack
from .network import DemandSpec, Network, topological_order


class BlocklengthError(ValueError):
    pass


def bits(n: int, rate: Fraction) -> int:
    """``n * rate`` as an integer bit count; raises if it is fractional."""
    x = n * rate
    if x.denominator != 1:
        raise BlocklengthError(f"blocklength {n} times rate {rate} is not an integer")
    return int(x)


def admissible(net: Network, demand: DemandSpec, n: int) -> bool:
    try:
        check_blocklength(net, demand, n)
    except BlocklengthError:
        return False
    return True


def check_blocklength(net: Network, demand: DemandSpec, n: int) -> None:
    if n < 1:
        raise BlocklengthError("blocklength must be positive")
    for e in net.edges:
        bits(n, e.capacity)
    for r in demand.rates.values():
        bits(n, r)


@dataclass(frozen=True)
class Block:
    kind: str  # "source" or "edge"
    id: str
    width: int
    offset: int


def input_layout(net: Network, demand: DemandSpec, n: int, v: str) -> list[Block]:
    blocks = []
    offset = 0
    for s in demand.sigma(v):
        w = bits(n, demand.rates[s])
        blocks.append(Block("source", s, w, offset))
        offset += w
    for e in net.in_edges(v):
        w = bits(n, e.capacity)
        blocks.append(Block("edge", e.id, w, offset))
        offset += w
    return blocks


def layout_width(blocks: list[Block]) -> int:
    return sum(b.width for b in blocks)


def message_offsets(demand: DemandSpec, n: int) -> dict[str, tuple[int, int]]:
    """``source -> (offset, width)`` inside a packed message tuple."""
    out = {}
    offset = 0
    for s in demand.sources:
        w = bits(n, demand.rates[s])
        out[s] = (offset, w)
        offset += w
    return out


def pack_messages(demand: DemandSpec, n: int, messages: Mapping[str, int]) -> int:
    packed = 0
    for s, (off, w) in message_offsets(demand, n).items():
        m = messages.get(s, 0)
        if m >> w:
            raise ValueError(f"message for source {s!r} exceeds {w} bits")
        packed |= m << off
    return packed


def unpack_messages(demand: DemandSpec, n: int, packed: int) -> dict[str, int]:
    return {s: (packed >> off) & ((1 << w) - 1) for s, (off, w) in message_offsets(demand, n).items()}


@dataclass(frozen=True)
class LinearNetworkCode:
    net: Network
    demand: DemandSpec
    n: int
    encoders: Mapping[str, Gf2Matrix]
    decoders: Mapping[tuple[str, str], Gf2Matrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        check_blocklength(self.net, self.demand, self.n)
        self.demand.check_against(self.net)
        object.__setattr__(self, "encoders", dict(sorted(self.encoders.items())))
        object.__setattr__(self, "decoders", dict(sorted(self.decoders.items())))
        ids = {e.id for e in self.net.edges}
        if set(self.encoders) != ids:
            missing, extra = ids - set(self.encoders), set(self.encoders) - ids
            raise ValueError(f"encoder set mismatch (missing {sorted(missing)}, extra {sorted(extra)})")
        for e in self.net.edges:
            width = layout_width(self.layout(e.tail))
            enc = self.encoders[e.id]
            if (enc.nrows, enc.ncols) != (bits(self.n, e.capacity), width):
                raise ValueError(
                    f"encoder for {e.id!r} is {enc.nrows}x{enc.ncols}, expected {bits(self.n, e.capacity)}x{width}"
                )
        for (v, s), dec in self.decoders.items():
            if s not in self.demand.beta(v):
                raise ValueError(f"decoder for ({v!r}, {s!r}) but node does not demand that source")
            shape = (bits(self.n, self.demand.rates[s]), layout_width(self.layout(v)))
            if (dec.nrows, dec.ncols) != shape:
                raise ValueError(f"decoder for ({v!r}, {s!r}) is {dec.nrows}x{dec.ncols}, expected {shape[0]}x{shape[1]}")

    def layout(self, v: str) -> list[Block]:
        return input_layout(self.net, self.demand, self.n, v)

    @property
    def message_bits(self) -> int:
        return sum(bits(self.n, r) for r in self.demand.rates.values())

    def demanded_pairs(self) -> list[tuple[str, str]]:
        return [(v, s) for v in self.demand.sinks for s in sorted(self.demand.beta(v))]


@dataclass(frozen=True)
class TransferMatrixSet:
    """Per-edge global transfer matrices over the packed message tuple.

    ``global_[e]`` is ``n*C_e x sum_s n*R_s``; its column block for source
    ``s`` is ``A_{s,e}``.
    """

    n: int
    offsets: Mapping[str, tuple[int, int]]
    global_: Mapping[str, Gf2Matrix]

    def a(self, s: str, e: str) -> Gf2Matrix:
        off, w = self.offsets[s]
        return self.global_[e].col_slice(off, off + w)

    def predict(self, e: str, packed_messages: int) -> int:
        return mat_vec(self.global_[e], packed_messages)


def _node_input_global(code: LinearNetworkCode, v: str, edge_global: Mapping[str, Gf2Matrix]) -> Gf2Matrix:
    """Map from the packed message tuple to the input vector of node ``v``."""
    offsets = message_offsets(code.demand, code.n)
    total = code.message_bits
    parts = []
    for b in code.layout(v):
        if b.kind == "source":
            off, w = offsets[b.id]
            parts.append(Gf2Matrix(w, total, tuple(1 << (off + i) for i in range(w))))
        else:
            parts.append(edge_global[b.id])
    return vstack(parts, ncols=total)


def compute_transfer_matrices(code: LinearNetworkCode) -> TransferMatrixSet:
    edge_global: dict[str, Gf2Matrix] = {}
    for v in topological_order(code.net):
        inp = _node_input_global(code, v, edge_global)
        for e in code.net.out_edges(v):
            edge_global[e.id] = mat_mul(code.encoders[e.id], inp)
    return TransferMatrixSet(code.n, message_offsets(code.demand, code.n), dict(sorted(edge_global.items())))


def node_input_matrices(code: LinearNetworkCode, tm: TransferMatrixSet | None = None) -> dict[str, Gf2Matrix]:
    tm = tm or compute_transfer_matrices(code)
    return {v: _node_input_global(code, v, tm.global_) for v in code.net.nodes}


@dataclass(frozen=True)
class SimulationResult:
    edges: dict[str, int]
    reconstructions: dict[tuple[str, str], int]


def _gather(code: LinearNetworkCode, v: str, messages: Mapping[str, int], edges: Mapping[str, int]) -> int:
    x = 0
    for b in code.layout(v):
        val = messages[b.id] if b.kind == "source" else edges[b.id]
        x |= val << b.offset
    return x


def simulate_code(code: LinearNetworkCode, messages: Mapping[str, int]) -> SimulationResult:
    """Run the code node by node in topological order on one message tuple."""
    offsets = message_offsets(code.demand, code.n)
    for s, (_, w) in offsets.items():
        if messages.get(s, 0) >> w:
            raise ValueError(f"message for {s!r} longer than {w} bits")
    msgs = {s: messages.get(s, 0) for s in offsets}
    edges: dict[str, int] = {}
    for v in topological_order(code.net):
        x = _gather(code, v, msgs, edges)
        for e in code.net.out_edges(v):
            edges[e.id] = mat_vec(code.encoders[e.id], x)
    recon = {}
    for (v, s), dec in code.decoders.items():
        recon[(v, s)] = mat_vec(dec, _gather(code, v, msgs, edges))
    return SimulationResult(dict(sorted(edges.items())), recon)


def evaluate_all(code: LinearNetworkCode, packed: np.ndarray | None = None) -> dict[str, np.ndarray]:
    """Values of every message, edge and reconstruction over many message tuples.

    Keys are ``M:s``, ``W:e`` and ``Mhat:v:s``. ``packed`` defaults to every
    tuple ``0 .. 2**bits - 1`` in order.
    """
    total = code.message_bits
    if packed is None:
        if total > 26:
            raise ValueError("too many message bits for exhaustive evaluation")
        packed = np.arange(1 << total, dtype=np.uint64)
    tm = compute_transfer_matrices(code)
    out: dict[str, np.ndarray] = {}
    for s, (off, w) in tm.offsets.items():
        out[f"M:{s}"] = (packed >> np.uint64(off)) & np.uint64((1 << w) - 1)
    for e, g in tm.global_.items():
        out[f"W:{e}"] = mat_vec_many(g, packed)
    inputs = node_input_matrices(code, tm)
    for (v, s), dec in code.decoders.items():
        out[f"Mhat:{v}:{s}"] = mat_vec_many(mat_mul(dec, inputs[v]), packed)
    return out


def decoder_target(code: LinearNetworkCode, s: str) -> Gf2Matrix:
    """The projection of the packed message tuple onto source ``s``."""
    off, w = message_offsets(code.demand, code.n)[s]
    return Gf2Matrix(w, code.message_bits, tuple(1 << (off + i) for i in range(w)))


def check_decodable(code: LinearNetworkCode, tm: TransferMatrixSet | None = None) -> dict[tuple[str, str], bool]:
    """Zero-error verdict per demanded (sink, source) pair.

    A pair without a decoder is reported as not decodable.
    """
    inputs = node_input_matrices(code, tm)
    out = {}
    for v, s in code.demanded_pairs():
        dec = code.decoders.get((v, s))
        out[(v, s)] = dec is not None and mat_mul(dec, inputs[v]) == decoder_target(code, s)
    return out


def check_decodable_exhaustive(code: LinearNetworkCode) -> dict[tuple[str, str], bool]:
    """Same verdict as :func:`check_decodable`, by running every message tuple."""
    vals = evaluate_all(code)
    out = {}
    for v, s in code.demanded_pairs():
        key = f"Mhat:{v}:{s}"
        out[(v, s)] = key in vals and bool(np.array_equal(vals[key], vals[f"M:{s}"]))
    return out


def synthesize_decoders(code: LinearNetworkCode) -> LinearNetworkCode:
    """Fill in a correct linear decoder for every demanded pair that admits one.

    Pairs that cannot be decoded linearly get the zero decoder.
    """
    inputs = node_input_matrices(code)
    decoders = {}
    for v, s in code.demanded_pairs():
        target = decoder_target(code, s)
        dec = solve_left(inputs[v], target)
        if dec is None:
            dec = Gf2Matrix.zeros(target.nrows, inputs[v].nrows)
        decoders[(v, s)] = dec
    return LinearNetworkCode(code.net, code.demand, code.n, code.encoders, decoders)


def all_message_tuples(code: LinearNetworkCode) -> Iterator[dict[str, int]]:
    for packed in range(1 << code.message_bits):
        yield unpack_messages(code.demand, code.n, packed)


def extend_blocklength(code: LinearNetworkCode, factor: int) -> LinearNetworkCode:
    """Run ``factor`` independent copies of the code side by side.

    Every block of width ``w`` becomes ``factor*w`` bits: copy 0 first.
    """
    if factor == 1:
        return code
    n2 = code.n * factor

    def lift(m: Gf2Matrix, blocks: list[Block]) -> Gf2Matrix:
        parts = []
        for b in blocks:
            sub = m.col_slice(b.offset, b.offset + b.width)
            data = []
            for t in range(factor):
                data.extend(r << (t * b.width) for r in sub.data)
            parts.append(Gf2Matrix(m.nrows * factor, b.width * factor, tuple(data)))
        return hstack(parts, nrows=m.nrows * factor)

    encoders = {e.id: lift(code.encoders[e.id], code.layout(e.tail)) for e in code.net.edges}
    decoders = {(v, s): lift(d, code.layout(v)) for (v, s), d in code.decoders.items()}
    return LinearNetworkCode(code.net, code.demand, n2, encoders, decoders)
