"""JSON and CSV formats for networks, codes, regions, distributions and reports.

Network JSON::

    {"nodes": ["s", "t"],
     "edges": [{"id": "e", "from": "s", "to": "t", "capacity": "3/2"}],
     "sources": [{"id": "1", "node": "s", "rate": "1"}],
     "demands": {"t": ["1"]}}

Code JSON (linear)::

    {"blocklength": 1,
     "encoders": {"e": "10\\n01"},
     "decoders": {"t:1": "1"}}

Matrix text is rows of 0/1 characters; column j of a node's input is bit j
of the concatenation (sources at the node ascending by id, then incoming
edges ascending by id). A general (nonlinear) code lists each encoder as an
integer lookup table instead of matrix text.

Region JSON::

    {"dimension": 2, "names": ["1", "2"], "offset": ["0", "0"],
     "inequalities": [{"subset": ["1"], "bound": "1", "label": "..."}]}

Rationals are written as ``"p/q"`` strings; floats as JSON numbers with 12
significant digits. Unknown fields produce a warning and are carried over
on output.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .gf2 import Gf2Matrix
from .info import DistributionTable
from .linear_code import LinearNetworkCode, input_layout, bits
from .network import DemandSpec, Network, format_fraction, to_fraction
from .oracle import GeneralCode
from .regions import Inequality, RateRegion


class SchemaError(ValueError):
    """Invalid input; ``path`` locates the offending JSON value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _unknown(obj: Mapping, known: set[str], path: str) -> dict[str, Any]:
    extra = {k: v for k, v in obj.items() if k not in known}
    for k in sorted(extra):
        warnings.warn(f"{path}.{k}: unknown field preserved", stacklevel=3)
    return extra


def _need(obj: Any, key: str, path: str, kind=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required field")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _rational(value: Any, path: str) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(path, str(exc)) from None


def fmt_float(x: float) -> float:
    """Round to 12 significant digits so reports are stable across platforms."""
    if x == 0 or not math.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.12g}")


# networks


@dataclass(frozen=True)
class Problem:
    net: Network
    demand: DemandSpec
    extra: dict[str, Any] = field(default_factory=dict)


def problem_from_obj(obj: Any, path: str = "$") -> Problem:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    extra = _unknown(obj, {"name", "nodes", "edges", "sources", "demands"}, path)
    nodes = _need(obj, "nodes", path, list)
    for i, v in enumerate(nodes):
        if not isinstance(v, str):
            raise SchemaError(f"{path}.nodes[{i}]", "node ids must be strings")
    edges = []
    for i, e in enumerate(_need(obj, "edges", path, list)):
        p = f"{path}.edges[{i}]"
        extra_e = _unknown(e, {"id", "from", "to", "capacity"}, p) if isinstance(e, dict) else {}
        if extra_e:
            extra.setdefault("_edge_extra", {})[str(e.get("id"))] = extra_e
        edges.append(
            (
                _need(e, "id", p, str),
                _need(e, "from", p, str),
                _need(e, "to", p, str),
                _rational(_need(e, "capacity", p), f"{p}.capacity"),
            )
        )
    rates, avail = {}, {}
    for i, s in enumerate(obj.get("sources", [])):
        p = f"{path}.sources[{i}]"
        sid = _need(s, "id", p, str)
        if sid in rates:
            raise SchemaError(f"{p}.id", f"duplicate source id {sid!r}")
        avail[sid] = _need(s, "node", p, str)
        rates[sid] = _rational(s.get("rate", "0"), f"{p}.rate")
    demands = {}
    dem = obj.get("demands", {})
    if not isinstance(dem, dict):
        raise SchemaError(f"{path}.demands", "expected an object")
    for v, ss in dem.items():
        if not isinstance(ss, list) or not all(isinstance(x, str) for x in ss):
            raise SchemaError(f"{path}.demands.{v}", "expected a list of source ids")
        demands[v] = set(ss)
    try:
        net = Network.build(edges, nodes=nodes, name=str(obj.get("name", "")))
        demand = DemandSpec(rates, avail, demands)
        demand.check_against(net)
    except (ValueError, KeyError) as exc:
        raise SchemaError(path, str(exc)) from None
    return Problem(net, demand, extra)


def problem_to_obj(p: Problem) -> dict[str, Any]:
    edge_extra = p.extra.get("_edge_extra", {})
    edges = []
    for e in p.net.edges:
        row = {"id": e.id, "from": e.tail, "to": e.head, "capacity": format_fraction(e.capacity)}
        row.update(edge_extra.get(e.id, {}))
        edges.append(row)
    obj: dict[str, Any] = {
        "nodes": list(p.net.nodes),
        "edges": edges,
        "sources": [
            {"id": s, "node": p.demand.availability[s], "rate": format_fraction(p.demand.rates[s])} for s in p.demand.sources
        ],
        "demands": {v: sorted(p.demand.beta(v)) for v in p.demand.sinks},
    }
    if p.net.name:
        obj["name"] = p.net.name
    obj.update({k: v for k, v in p.extra.items() if k != "_edge_extra"})
    return obj


# codes


@dataclass(frozen=True)
class CodeDoc:
    code: LinearNetworkCode | GeneralCode
    extra: dict[str, Any] = field(default_factory=dict)


def _matrix(text: Any, nrows: int, ncols: int, path: str) -> Gf2Matrix:
    if not isinstance(text, str):
        raise SchemaError(path, "expected matrix text")
    if not text.strip():
        if nrows and ncols:
            raise SchemaError(path, f"empty matrix, expected {nrows}x{ncols}")
        return Gf2Matrix.zeros(nrows, ncols)
    try:
        m = Gf2Matrix.from_text(text, ncols)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None
    if (m.nrows, m.ncols) != (nrows, ncols):
        raise SchemaError(path, f"matrix is {m.nrows}x{m.ncols}, expected {nrows}x{ncols}")
    return m


def _split_pair(key: str, path: str) -> tuple[str, str]:
    node, sep, source = key.rpartition(":")
    if not sep or not node:
        raise SchemaError(path, "decoder keys must look like 'node:source'")
    return node, source


def code_from_obj(obj: Any, problem: Problem, path: str = "$") -> CodeDoc:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    extra = _unknown(obj, {"blocklength", "encoders", "decoders"}, path)
    n = _need(obj, "blocklength", path, int)
    if n < 1:
        raise SchemaError(f"{path}.blocklength", "must be positive")
    net, demand = problem.net, problem.demand
    try:
        widths = {v: sum(b.width for b in input_layout(net, demand, n, v)) for v in net.nodes}
        out_w = {e.id: bits(n, e.capacity) for e in net.edges}
    except ValueError as exc:
        raise SchemaError(f"{path}.blocklength", str(exc)) from None
    raw = _need(obj, "encoders", path, dict)
    for eid in raw:
        if not net.has_edge(eid):
            raise SchemaError(f"{path}.encoders.{eid}", "unknown edge")
    general = any(isinstance(v, list) for v in raw.values())
    encoders: dict[str, Any] = {}
    for e in net.edges:
        p = f"{path}.encoders.{e.id}"
        if e.id not in raw:
            raise SchemaError(p, "missing encoder")
        if general:
            table = raw[e.id]
            if not isinstance(table, list) or len(table) != 1 << widths[e.tail]:
                raise SchemaError(p, f"expected a lookup table of length {1 << widths[e.tail]}")
            if any(not isinstance(y, int) or not 0 <= y < 1 << out_w[e.id] for y in table):
                raise SchemaError(p, "table entries out of range")
            encoders[e.id] = tuple(table)
        else:
            encoders[e.id] = _matrix(raw[e.id], out_w[e.id], widths[e.tail], p)
    decoders: dict[tuple[str, str], Any] = {}
    for key, val in (obj.get("decoders") or {}).items():
        p = f"{path}.decoders.{key}"
        v, s = _split_pair(key, p)
        if v not in net.nodes or s not in demand.rates:
            raise SchemaError(p, "unknown node or source")
        if general:
            if not isinstance(val, list):
                raise SchemaError(p, "expected a lookup table")
            decoders[(v, s)] = tuple(val)
        else:
            decoders[(v, s)] = _matrix(val, bits(n, demand.rates[s]), widths[v], p)
    try:
        if general:
            code = GeneralCode(net, demand, n, encoders, decoders)
        else:
            code = LinearNetworkCode(net, demand, n, encoders, decoders)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None
    return CodeDoc(code, extra)


def code_to_obj(doc: CodeDoc | LinearNetworkCode | GeneralCode) -> dict[str, Any]:
    if not isinstance(doc, CodeDoc):
        doc = CodeDoc(doc)
    code = doc.code
    if isinstance(code, LinearNetworkCode):
        enc = {e: m.to_text() for e, m in sorted(code.encoders.items())}
        dec = {f"{v}:{s}": m.to_text() for (v, s), m in sorted(code.decoders.items())}
    else:
        enc = {e: list(t) for e, t in sorted(code.encoders.items())}
        dec = {f"{v}:{s}": list(t) for (v, s), t in sorted(code.decoders.items())}
    obj = {"blocklength": code.n, "encoders": enc, "decoders": dec}
    obj.update(doc.extra)
    return obj


# regions


def _num(x) -> Any:
    if isinstance(x, (int, Fraction)):
        return format_fraction(Fraction(x))
    return fmt_float(float(x))


def _parse_num(x: Any, path: str):
    if isinstance(x, float):
        return x
    return _rational(x, path)


def region_to_obj(region: RateRegion) -> dict[str, Any]:
    return {
        "dimension": region.dimension,
        "names": list(region.names),
        "offset": [_num(o) for o in region.offset],
        "inequalities": [
            {"subset": [region.names[i] for i in q.subset], "bound": _num(q.bound), "label": q.label} for q in region.inequalities
        ],
    }


def region_from_obj(obj: Any, path: str = "$") -> RateRegion:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    _unknown(obj, {"dimension", "names", "offset", "inequalities"}, path)
    k = _need(obj, "dimension", path, int)
    names = obj.get("names") or [str(i + 1) for i in range(k)]
    if len(names) != k:
        raise SchemaError(f"{path}.names", f"expected {k} names")
    idx = {n: i for i, n in enumerate(names)}
    offset = [_parse_num(x, f"{path}.offset[{i}]") for i, x in enumerate(obj.get("offset") or ["0"] * k)]
    ineqs = []
    for i, q in enumerate(_need(obj, "inequalities", path, list)):
        p = f"{path}.inequalities[{i}]"
        subset = []
        for j, s in enumerate(_need(q, "subset", p, list)):
            key = str(s)
            if key not in idx:
                raise SchemaError(f"{p}.subset[{j}]", f"unknown coordinate {s!r}")
            subset.append(idx[key])
        ineqs.append(Inequality(tuple(sorted(subset)), _parse_num(_need(q, "bound", p), f"{p}.bound"), str(q.get("label", ""))))
    try:
        return RateRegion(k, tuple(ineqs), tuple(offset), tuple(names))
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


# reports


def to_jsonable(obj: Any) -> Any:
    """Plain JSON data: Fractions as strings, floats at 12 digits, dataclasses as dicts."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return format_fraction(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if isinstance(obj, RateRegion):
        return region_to_obj(obj)
    if isinstance(obj, (LinearNetworkCode, GeneralCode)):
        return code_to_obj(obj)
    if isinstance(obj, Network):
        return {"nodes": list(obj.nodes), "edges": [[e.id, e.tail, e.head, format_fraction(e.capacity)] for e in obj.edges]}
    if isinstance(obj, Gf2Matrix):
        return obj.to_text()
    if dataclasses.is_dataclass(obj):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        for prop in ("passed", "ok"):
            if hasattr(type(obj), prop) and isinstance(getattr(type(obj), prop), property):
                out[prop] = bool(getattr(obj, prop))
        return out
    if isinstance(obj, Mapping):
        return {(":".join(map(str, k)) if isinstance(k, tuple) else str(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(x) for x in items]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# files


def _load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None


def load_problem(path: str | Path) -> Problem:
    return problem_from_obj(_load_json(path))


def load_code(path: str | Path, problem: Problem) -> CodeDoc:
    return code_from_obj(_load_json(path), problem)


def load_region(path: str | Path) -> RateRegion:
    return region_from_obj(_load_json(path))


def load_distribution(path: str | Path) -> DistributionTable:
    try:
        return DistributionTable.from_csv(Path(path).read_text())
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError("$", str(exc)) from None


def detect_kind(obj: Any) -> str:
    if isinstance(obj, dict):
        if "edges" in obj:
            return "network"
        if "encoders" in obj:
            return "code"
        if "inequalities" in obj:
            return "region"
    raise SchemaError("$", "not a network, code or region document")


def round_trip(path: str | Path, problem: Problem | None = None) -> bool:
    """Parse, serialize and parse again; True iff both parses agree.

    ``.csv`` files are distribution tables. Code files need ``problem``.
    """
    path = Path(path)
    if path.suffix == ".csv":
        d = load_distribution(path)
        return DistributionTable.from_csv(d.to_csv()) == d
    obj = _load_json(path)
    kind = detect_kind(obj)
    if kind == "network":
        p = problem_from_obj(obj)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            q = problem_from_obj(json.loads(dumps(problem_to_obj(p))))
        return p == q
    if kind == "code":
        if problem is None:
            raise ValueError("a code document needs its network to round-trip")
        c = code_from_obj(obj, problem)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            d = code_from_obj(json.loads(dumps(code_to_obj(c))), problem)
        return c == d
    r = region_from_obj(obj)
    return region_from_obj(json.loads(dumps(region_to_obj(r)))) == r
