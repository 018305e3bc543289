"""Command-line front end.

Exit status: 0 on success, 1 on invalid input (bad file, schema error,
impossible request), 2 when a checked inequality fails. A report is still
written on status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import warnings
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import serialize as ser
from .cutset import UnsupportedDemandError, check_delta_robustness, cutset_region
from .info import induced_distribution
from .linear_code import LinearNetworkCode
from .network import CycleError, enumerate_cuts, format_fraction, max_flow, to_fraction, validate_network
from .oracle import BudgetExceeded, achievable_set, default_budget, delta_gap_report, parse_budget
from .perturbation import verify_rate_loss
from .regions import DeterministicBC, dbc_from_table, dbc_region, mac_region_from_code, margins, r_mac_vector, region_membership
from .theorem import StructureError, TheoremInstance, verify_theorem

SCHEMAS = """\
file formats
  network JSON
    {"nodes": ["s","t"],
     "edges": [{"id":"e","from":"s","to":"t","capacity":"3/2"}],
     "sources": [{"id":"1","node":"s","rate":"1"}],
     "demands": {"t": ["1"]}}
    rationals are integers or "p/q" strings
  code JSON
    {"blocklength": 1, "encoders": {"e": "10\\n01"}, "decoders": {"t:1": "1"}}
    matrix text: rows of 0/1; input bits of node v are the sources at v
    (ascending id) followed by incoming edges (ascending id), block 0 first;
    a nonlinear code gives integer lookup tables instead of matrix text
  region JSON
    {"dimension": 2, "names": ["1","2"], "offset": ["0","0"],
     "inequalities": [{"subset": ["1"], "bound": "1", "label": "..."}]}
  distribution CSV
    header "X[2],Y[4],p"; one row per outcome; p rational ("1/8")
  broadcast channel JSON (dbc-region)
    {"inputSize": 4, "functions": [[0,0,1,1],[0,1,0,1]], "px": ["1/4","1/4","1/4","1/4"]}

environment
  NETCODE_BUDGET  default oracle search budget (integer or 2^k)
"""


def _csv(rows: list[dict[str, Any]]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ";".join(map(str, v)) if isinstance(v, list) else v for k, v in ser.to_jsonable(r).items()})
    return buf.getvalue()


def _names(text: str | None) -> list[str]:
    return [t for t in (text or "").split(",") if t]


def _workers(args) -> int:
    return args.workers or os.cpu_count() or 1


def _budget(args) -> int:
    return parse_budget(args.budget) if args.budget else default_budget()


# commands; each returns (report, rows-for-csv or None, passed)


def cmd_validate(args):
    obj = ser._load_json(args.network)
    kind = ser.detect_kind(obj)
    if kind == "region":
        ser.region_from_obj(obj)
        return {"kind": kind, "ok": True, "violations": []}, None, True
    problem = ser.problem_from_obj(obj)
    report = validate_network(problem.net)
    out = {"kind": kind, "ok": report.ok, "violations": list(report.violations)}
    if report.ok and args.code:
        ser.load_code(args.code, problem)
        out["code"] = "ok"
    if not report.ok:
        raise ser.SchemaError("$", "; ".join(report.violations))
    return out, None, True


def cmd_maxflow(args):
    p = ser.load_problem(args.network)
    src, dst = _names(args.src), _names(args.dst)
    value = max_flow(p.net, src, dst)
    out: dict[str, Any] = {"src": src, "dst": dst, "value": value}
    if len(p.net.nodes) <= 20:
        best = min(enumerate_cuts(p.net, src, dst), key=lambda c: (c.capacity, len(c.source_side), sorted(c.source_side)))
        out["minCut"] = {"sourceSide": sorted(best.source_side), "edges": sorted(best.crossing_edges), "capacity": best.capacity}
    return out, None, True


def cmd_cutset(args):
    p = ser.load_problem(args.network)
    region = cutset_region(p.net, p.demand, allow_general=args.general)
    rows = [{"sources": list(c.sources), "sink": c.sink, "bound": c.bound} for c in region.constraints]
    out = {"demandType": region.demand_type, "tight": region.tight, "sources": list(region.sources), "constraints": rows}
    return out, rows, True


def _delta(args, net) -> Fraction:
    delta = to_fraction(args.delta)
    cap = net.edge(args.edge).capacity
    if delta > cap:
        raise ValueError(f"delta exceeds capacity: {format_fraction(delta)} > {format_fraction(cap)} on edge {args.edge!r}")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return delta


def cmd_robust(args):
    import random

    p = ser.load_problem(args.network)
    delta = _delta(args, p.net)
    rep = check_delta_robustness(p.net, p.demand, args.edge, delta, rng=random.Random(args.seed), n_probes=args.probes)
    rows = [
        {"sources": list(c.sources), "sink": c.sink, "before": c.bound, "after": after, "drop": c.bound - after}
        for c, after in rep.bound_drops
    ]
    out = {
        "edge": rep.edge,
        "delta": rep.delta,
        "constraints": rows,
        "probes": rep.probes,
        "probeFailures": [list(r) for r in rep.probe_failures],
        "pass": rep.passed,
    }
    return out, rows, rep.passed


def cmd_perturb(args):
    p = ser.load_problem(args.network)
    delta = _delta(args, p.net)
    code = ser.load_code(args.code, p).code
    if not isinstance(code, LinearNetworkCode):
        raise ValueError("perturb needs a linear code")
    rep = verify_rate_loss(code, args.edge, delta, simulate=args.simulate)
    rows = [{"s": r.source, "originalRate": r.original, "restrictedRate": r.restricted, "bound": r.bound} for r in rep.per_source]
    out: dict[str, Any] = {"edge": rep.edge, "delta": rep.delta, "blocklength": rep.n, "perSource": rows, "pass": rep.passed}
    if rep.check is not None:
        out["simulation"] = {
            "tuples": rep.check.tuples,
            "zeroOnEdge": rep.check.zero_on_edge,
            "matchesOriginal": rep.check.matches_original,
            "decodable": {f"{v}:{s}": ok for (v, s), ok in sorted(rep.check.decodable_preserved.items())},
        }
    if args.emit_code:
        Path(args.emit_code).write_text(ser.dumps(ser.code_to_obj(rep.restricted_code)))
    return out, rows, rep.passed


def _region_report(region, r=None) -> dict[str, Any]:
    out = {"region": ser.region_to_obj(region)}
    if r is not None:
        out["point"] = list(r)
        out["margins"] = [{"subset": [region.names[i] for i in q.subset], "margin": m} for q, m in margins(region, r)]
        out["member"] = region_membership(region, r)
    return out


def cmd_mac(args):
    if args.dist:
        d = ser.load_distribution(args.dist)
        msgs, outs = _names(args.messages), _names(args.output)
    else:
        if not (args.network and args.code and args.node):
            raise ValueError("mac-region needs --dist or --net/--code/--node")
        p = ser.load_problem(args.network)
        code = ser.load_code(args.code, p).code
        d = induced_distribution(code)
        msgs = [f"M:{s}" for s in p.demand.sources]
        outs = [f"M:{s}" for s in p.demand.sigma(args.node)] + [f"W:{e.id}" for e in p.net.in_edges(args.node)]
        outs = [w for w in outs if w not in msgs]
    if not msgs or not outs:
        raise ValueError("need at least one message and one output variable")
    region = mac_region_from_code(d, msgs, outs)
    r = r_mac_vector(d, msgs, outs)
    out = _region_report(region, r)
    out["rMac"] = out.pop("point")
    rows = [{"subset": x["subset"], "bound": q.bound} for x, q in zip(out["region"]["inequalities"], region.inequalities)]
    return out, rows, out["member"]


def cmd_dbc(args):
    if args.bc:
        obj = ser._load_json(args.bc)
        size = ser._need(obj, "inputSize", "$", int)
        funcs = ser._need(obj, "functions", "$", list)
        px = [ser._rational(x, f"$.px[{i}]") for i, x in enumerate(obj.get("px") or [])]
        bc = DeterministicBC(size, tuple(tuple(f) for f in funcs), tuple(px))
    elif args.dist:
        d = ser.load_distribution(args.dist)
        bc, _ = dbc_from_table(d, _names(args.inputs), _names(args.outputs))
    else:
        raise ValueError("dbc-region needs --bc or --dist")
    region = dbc_region(bc)
    r = [to_fraction(x) for x in _names(args.rates)] or None
    out = _region_report(region, r)
    rows = [{"subset": x["subset"], "bound": q.bound} for x, q in zip(out["region"]["inequalities"], region.inequalities)]
    return out, rows, True


def cmd_theorem(args):
    p = ser.load_problem(args.network)
    code = ser.load_code(args.code, p).code
    rep = verify_theorem(TheoremInstance(code, args.node, args.edge))
    out = {
        "node": rep.node,
        "edge": rep.edge,
        "delta": rep.delta,
        "blocklength": rep.n,
        "constantSources": list(rep.constant_sources),
        "errorProbability": rep.p_err,
        "eps": rep.eps,
        "mac": {
            "rMac": list(rep.mac.r_mac),
            "regionMargins": [{"subset": list(s), "margin": m} for s, m in rep.mac.region_margins],
            "perSource": [
                {"s": x.source, "mutualInformation": x.mutual_information, "lowerBound": x.lower_bound, "margin": x.margin}
                for x in rep.mac.per_source
            ],
            "pass": rep.mac.passed,
        },
        "wE": {
            "value": rep.w_e.value,
            "entropy": rep.w_e.entropy,
            "average": rep.w_e.average,
            "lowerBound": rep.w_e.lower_bound,
            "pass": rep.w_e.passed,
        },
        "bc": {
            "lines": [
                {"subset": list(x.subset), "entropy": x.entropy, "target": x.target, "margin": x.margin, "chainBound": x.chain_bound, "chainMargin": x.chain_margin}
                for x in rep.bc.lines
            ],
            "inRegion": rep.bc_in_region,
            "pass": rep.bc.passed,
        },
        "pass": rep.passed,
    }
    return out, None, rep.passed


def _rate_rows(sources, rates):
    return [dict(zip(sources, r)) for r in rates]


def cmd_oracle(args):
    p = ser.load_problem(args.network)
    a = achievable_set(p.net, p.demand, args.n, args.mode, _budget(args), _workers(args))
    rows = _rate_rows(a.sources, a.rates)
    out = {"sources": list(a.sources), "blocklength": a.n, "mode": a.mode, "achievable": rows, "gridSize": len(a.grid)}
    return out, rows, True


def cmd_gap(args):
    p = ser.load_problem(args.network)
    delta = _delta(args, p.net)
    rep = delta_gap_report(p.net, p.demand, args.edge, delta, args.n, args.mode, _budget(args), _workers(args))
    srcs = rep.original.sources
    rows = [{"rate": list(e.rate), "witness": list(e.witness) if e.witness else None, "gap": e.gap} for e in rep.entries]
    out = {
        "edge": rep.edge,
        "delta": rep.delta,
        "blocklength": rep.n,
        "mode": rep.mode,
        "sources": list(srcs),
        "original": _rate_rows(srcs, rep.original.rates),
        "reduced": _rate_rows(srcs, rep.reduced.rates),
        "entries": rows,
        "worstGap": rep.worst_gap,
        "pass": rep.passed,
    }
    return out, rows, rep.passed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netcap",
        description="Exact checks of single-edge capacity reductions in acyclic networks.",
        epilog=SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    net = argparse.ArgumentParser(add_help=False)
    net.add_argument("network", nargs="?", help="network JSON")
    net.add_argument("--net", dest="net_flag", help="network JSON (alternative to the positional)")
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--n", type=int, default=1, help="blocklength")
    search.add_argument("--mode", choices=("linear", "all"), default="linear")
    search.add_argument("--budget", help="largest search space per rate tuple (integer or 2^k)")
    search.add_argument("--workers", type=int, default=0, help="worker processes (default: available CPUs)")

    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", parents=[common, net], help="check a network (and optionally a code)")
    s.add_argument("--code")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("maxflow", parents=[common, net], help="exact max-flow between node sets")
    s.add_argument("--src", required=True, help="comma-separated source nodes")
    s.add_argument("--dst", required=True, help="comma-separated sink nodes")
    s.set_defaults(func=cmd_maxflow)

    s = sub.add_parser("cutset-region", parents=[common, net], help="cut-set region of the demand")
    s.add_argument("--general", action="store_true", help="allow a non-tight outer bound for other demands")
    s.set_defaults(func=cmd_cutset)

    s = sub.add_parser("check-robustness", parents=[common, net], help="cut-set bounds drop by at most delta")
    s.add_argument("--edge", required=True)
    s.add_argument("--delta", required=True)
    s.add_argument("--probes", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_robust)

    s = sub.add_parser("perturb", parents=[common, net], help="kernel-restrict a linear code around a reduced edge")
    s.add_argument("--code", required=True)
    s.add_argument("--edge", required=True)
    s.add_argument("--delta", required=True)
    s.add_argument("--simulate", action="store_true", help="also check every restricted tuple exhaustively")
    s.add_argument("--emit-code", help="write the restricted code JSON here")
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("mac-region", parents=[common, net], help="MAC region induced by a code or a table")
    s.add_argument("--dist", help="distribution CSV")
    s.add_argument("--messages", help="comma-separated message variables (with --dist)")
    s.add_argument("--output", help="comma-separated output variables (with --dist)")
    s.add_argument("--code")
    s.add_argument("--node", help="receiving node (with --net/--code)")
    s.set_defaults(func=cmd_mac)

    s = sub.add_parser("dbc-region", parents=[common], help="deterministic broadcast region at a given input law")
    s.add_argument("--bc", help="broadcast channel JSON")
    s.add_argument("--dist", help="distribution CSV")
    s.add_argument("--inputs")
    s.add_argument("--outputs")
    s.add_argument("--rates", help="comma-separated rate point to test")
    s.set_defaults(func=cmd_dbc, network=None, net_flag=None)

    s = sub.add_parser("verify-theorem", parents=[common, net], help="check the relay-node edge-removal argument on a code")
    s.add_argument("--code", required=True)
    s.add_argument("--edge", required=True)
    s.add_argument("--node", required=True)
    s.set_defaults(func=cmd_theorem)

    s = sub.add_parser("oracle", parents=[common, net, search], help="zero-error achievable rates by exhaustive search")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("oracle-gap", parents=[common, net, search], help="achievable-set loss when an edge is reduced")
    s.add_argument("--edge", required=True)
    s.add_argument("--delta", required=True)
    s.set_defaults(func=cmd_gap)
    return parser


def _emit(args, report: Any, rows) -> None:
    if args.format == "csv" and rows is not None:
        text = _csv(rows)
    else:
        text = ser.dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.network = args.network or args.net_flag
    if args.func not in (cmd_dbc,) and not args.network and not (args.func is cmd_mac and args.dist):
        parser.error("a network file is required")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report, rows, passed = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except (ser.SchemaError, ValueError, KeyError, OSError, CycleError, StructureError, UnsupportedDemandError, BudgetExceeded, ArithmeticError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1
    _emit(args, report, rows)
    return 0 if passed else 2


if __name__ == "__main__":
    sys.exit(main())
