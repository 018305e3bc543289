"""Exact joint distribution tables and Shannon quantities in bits."""

from __future__ import annotations

import csv
import io
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .network import format_fraction, to_fraction

TOL = 1e-9
MAX_MESSAGE_BITS = 24


@dataclass(frozen=True)
class DistributionTable:
    """Joint pmf over named finite variables with rational probabilities."""

    variables: tuple[tuple[str, int], ...]
    probs: Mapping[tuple[int, ...], Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple((str(n), int(k)) for n, k in self.variables))
        probs = {tuple(int(x) for x in o): to_fraction(p) for o, p in self.probs.items()}
        probs = {o: p for o, p in sorted(probs.items()) if p != 0}
        object.__setattr__(self, "probs", probs)
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable name")
        if not probs:
            raise ValueError("empty distribution table")
        for o, p in probs.items():
            if p < 0:
                raise ValueError("negative probability")
            if len(o) != len(names):
                raise ValueError("outcome arity does not match variables")
            for x, (_, k) in zip(o, self.variables):
                if not 0 <= x < k:
                    raise ValueError(f"outcome {o} outside alphabet")
        if sum(probs.values()) != 1:
            raise ValueError("probabilities do not sum to 1")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def size(self, name: str) -> int:
        return self.variables[self.index(name)][1]

    def marginal(self, names: Sequence[str]) -> dict[tuple[int, ...], Fraction]:
        idx = [self.index(n) for n in names]
        out: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for o, p in self.probs.items():
            out[tuple(o[i] for i in idx)] += p
        return dict(out)

    def project(self, names: Sequence[str]) -> DistributionTable:
        return DistributionTable(tuple((n, self.size(n)) for n in names), self.marginal(names))

    def condition(self, assignment: Mapping[str, int]) -> DistributionTable:
        """Condition on fixed values of some variables (they stay in the table)."""
        idx = {self.index(n): v for n, v in assignment.items()}
        kept = {o: p for o, p in self.probs.items() if all(o[i] == v for i, v in idx.items())}
        total = sum(kept.values())
        if total == 0:
            raise ValueError("conditioning event has probability zero")
        return DistributionTable(self.variables, {o: p / total for o, p in kept.items()})

    def probability(self, predicate) -> Fraction:
        names = self.names
        return sum((p for o, p in self.probs.items() if predicate(dict(zip(names, o)))), Fraction(0))

    @classmethod
    def from_arrays(cls, columns: Mapping[str, np.ndarray], sizes: Mapping[str, int]) -> DistributionTable:
        """Uniform weight on each row of equally long value arrays."""
        names = list(columns)
        stacked = np.stack([np.asarray(columns[n], dtype=np.uint64) for n in names], axis=1)
        rows, counts = np.unique(stacked, axis=0, return_counts=True)
        total = int(counts.sum())
        probs = {tuple(int(x) for x in r): Fraction(int(c), total) for r, c in zip(rows, counts)}
        return cls(tuple((n, sizes[n]) for n in names), probs)

    # CSV: header cells are ``name[size]`` followed by ``p``
    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"{n}[{k}]" for n, k in self.variables] + ["p"])
        for o, p in self.probs.items():
            w.writerow(list(o) + [format_fraction(p)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> DistributionTable:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][-1] != "p":
            raise ValueError("distribution CSV needs a header ending in 'p'")
        variables = []
        for cell in rows[0][:-1]:
            m = re.fullmatch(r"(.*)\[(\d+)\]", cell)
            if not m:
                raise ValueError(f"header cell {cell!r} is not name[size]")
            variables.append((m.group(1), int(m.group(2))))
        probs: dict[tuple[int, ...], Fraction] = {}
        for line, r in enumerate(rows[1:], start=2):
            if not r:
                continue
            try:
                probs[tuple(int(x) for x in r[:-1])] = to_fraction(r[-1])
            except ValueError as exc:
                raise ValueError(f"row {line}: {exc}") from exc
        return cls(tuple(variables), probs)


def _h(pmf: Iterable[Fraction]) -> float:
    total = 0.0
    for p in pmf:
        if p > 0:
            q = float(p)
            total -= q * math.log2(q)
    return total


def _names(vars_: str | Sequence[str]) -> list[str]:
    return [vars_] if isinstance(vars_, str) else list(vars_)


def entropy(d: DistributionTable, vars_: str | Sequence[str]) -> float:
    names = _names(vars_)
    if not names:
        return 0.0
    return max(0.0, _h(d.marginal(names).values()))


def _disjoint(*groups: list[str]) -> None:
    seen: set[str] = set()
    for g in groups:
        if seen & set(g):
            raise ValueError("variable subsets must be disjoint")
        seen |= set(g)


def _clamp(x: float) -> float:
    if x < -TOL:
        raise ArithmeticError(f"information quantity {x} is negative beyond tolerance")
    return max(x, 0.0)


def conditional_entropy(d: DistributionTable, a: str | Sequence[str], b: str | Sequence[str]) -> float:
    a, b = _names(a), _names(b)
    _disjoint(a, b)
    return _clamp(entropy(d, a + b) - entropy(d, b))


def mutual_information(d: DistributionTable, a: str | Sequence[str], b: str | Sequence[str]) -> float:
    a, b = _names(a), _names(b)
    _disjoint(a, b)
    return _clamp(entropy(d, a) + entropy(d, b) - entropy(d, a + b))


def conditional_mutual_information(
    d: DistributionTable, a: str | Sequence[str], b: str | Sequence[str], c: str | Sequence[str]
) -> float:
    a, b, c = _names(a), _names(b), _names(c)
    _disjoint(a, b, c)
    return _clamp(entropy(d, a + c) + entropy(d, b + c) - entropy(d, a + b + c) - entropy(d, c))


def binary_entropy(p: float | Fraction) -> float:
    """``h(p)`` in bits with ``h(0) = h(1) = 0``."""
    if not 0 <= p <= 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0 or p == 1:
        return 0.0
    p = float(p)
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def fano_upper_bound(p_err: float | Fraction, message_bits: float) -> float:
    """Upper bound ``h(P) + P * log|M|`` on ``H(M | Mhat)``."""
    if message_bits < 0:
        raise ValueError("message size must be nonnegative")
    return binary_entropy(p_err) + float(p_err) * message_bits


def independent(d: DistributionTable, groups: Sequence[Sequence[str]]) -> bool:
    """Exact test that the joint of ``groups`` is the product of their marginals."""
    groups = [list(g) for g in groups]
    flat = [n for g in groups for n in g]
    joint = d.marginal(flat)
    margs = [d.marginal(g) for g in groups]
    supports = [list(m.items()) for m in margs]
    # product of marginals must place all its mass exactly where the joint does
    count = 0
    for combo in _product(supports):
        key = tuple(x for o, _ in combo for x in o)
        p = Fraction(1)
        for _, q in combo:
            p *= q
        if joint.get(key, Fraction(0)) != p:
            return False
        count += 1
    return count == len(joint)


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


@dataclass(frozen=True)
class TerminalBoundReport:
    lhs: float  # I(M; W2..Wp)
    full: float  # I(M; W1..Wp)
    n_delta: float
    h_w1: float

    @property
    def rhs(self) -> float:
        return self.full - self.n_delta

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.slack >= -TOL


def terminal_node_bound_check(
    d: DistributionTable, source: str, removed: str, others: Sequence[str], n_delta: float
) -> TerminalBoundReport:
    """Dropping one input ``removed`` of a terminal node costs at most ``n*delta`` bits."""
    h1 = entropy(d, removed)
    if h1 > n_delta + TOL:
        raise ValueError(f"H({removed}) = {h1} exceeds n*delta = {n_delta}")
    others = list(others)
    return TerminalBoundReport(
        lhs=mutual_information(d, source, others) if others else 0.0,
        full=mutual_information(d, source, [removed] + others),
        n_delta=float(n_delta),
        h_w1=h1,
    )


def variable_sizes(code) -> dict[str, int]:
    """Alphabet sizes for every ``M:``, ``W:`` and ``Mhat:`` variable of a code."""
    from .linear_code import bits

    sizes = {}
    for s in code.demand.sources:
        sizes[f"M:{s}"] = 1 << bits(code.n, code.demand.rates[s])
    for e in code.net.edges:
        sizes[f"W:{e.id}"] = 1 << bits(code.n, e.capacity)
    for v, s in code.demanded_pairs():
        sizes[f"Mhat:{v}:{s}"] = 1 << bits(code.n, code.demand.rates[s])
    return sizes


def evaluate_code(code) -> dict[str, np.ndarray]:
    from .linear_code import LinearNetworkCode, evaluate_all

    if code.message_bits > MAX_MESSAGE_BITS:
        raise ValueError(f"exhaustive tables limited to {MAX_MESSAGE_BITS} message bits")
    if isinstance(code, LinearNetworkCode):
        return evaluate_all(code)
    return code.evaluate_all()


def induced_distribution(code, selection: Sequence[str] | None = None) -> DistributionTable:
    """Joint table induced by uniform independent messages.

    Variable names are ``M:s``, ``W:e`` and ``Mhat:v:s``; ``selection``
    defaults to all of them.
    """
    values = evaluate_code(code)
    sizes = variable_sizes(code)
    if selection is None:
        selection = sorted(values)
    missing = [n for n in selection if n not in values]
    if missing:
        raise KeyError(f"unknown variables {missing}")
    return DistributionTable.from_arrays({n: values[n] for n in selection}, sizes)
