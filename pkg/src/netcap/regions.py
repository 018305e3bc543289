"""Polymatroid-style rate regions: MAC and deterministic broadcast regions.

A region is a list of subset-sum upper bounds plus an offset:
``r`` is a member iff ``sum_{s in A} (r_s - offset_s) <= bound_A`` for every
listed ``A``. Membership is purely linear; no clamping of ``r - offset``.
Bounds may be floats (entropies) or Fractions (cut values); Fraction-only
comparisons are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .info import TOL, DistributionTable, entropy, independent, mutual_information, conditional_mutual_information

Number = Union[float, Fraction]
MAX_DIMENSION = 16


@dataclass(frozen=True)
class Inequality:
    subset: tuple[int, ...]
    bound: Number
    label: str = ""


@dataclass(frozen=True)
class RateRegion:
    dimension: int
    inequalities: tuple[Inequality, ...]
    offset: tuple[Number, ...] = ()
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.offset:
            object.__setattr__(self, "offset", (Fraction(0),) * self.dimension)
        if not self.names:
            object.__setattr__(self, "names", tuple(str(i + 1) for i in range(self.dimension)))
        if len(self.offset) != self.dimension or len(self.names) != self.dimension:
            raise ValueError("offset/names length must equal the dimension")
        for ineq in self.inequalities:
            if not ineq.subset or any(not 0 <= i < self.dimension for i in ineq.subset):
                raise ValueError(f"bad subset {ineq.subset}")
            if ineq.bound < -TOL:
                raise ValueError("region bounds must be nonnegative")

    def bound_for(self, subset: Sequence[int]) -> Number:
        key = tuple(sorted(subset))
        matches = [q.bound for q in self.inequalities if q.subset == key]
        if not matches:
            raise KeyError(f"no inequality for subset {key}")
        return min(matches)


def _exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def _vector(region: RateRegion, r: Sequence[Number] | Mapping[str, Number]) -> list[Number]:
    if isinstance(r, Mapping):
        if set(r) != set(region.names):
            raise ValueError("rate vector keys do not match region coordinates")
        r = [r[n] for n in region.names]
    if len(r) != region.dimension:
        raise ValueError(f"rate vector has {len(r)} entries, region dimension is {region.dimension}")
    return list(r)


def margins(region: RateRegion, r: Sequence[Number] | Mapping[str, Number]) -> list[tuple[Inequality, Number]]:
    """``bound - lhs`` for each inequality; negative means violated."""
    r = _vector(region, r)
    out = []
    for q in region.inequalities:
        terms = [r[i] - region.offset[i] for i in q.subset]
        if _exact(q.bound, *terms):
            lhs = sum(terms, Fraction(0))
        else:
            lhs = sum(float(t) for t in terms)
        out.append((q, q.bound - lhs))
    return out


def region_membership(region: RateRegion, r: Sequence[Number] | Mapping[str, Number], tol: float = TOL) -> bool:
    return all(m >= 0 if isinstance(m, Fraction) else m >= -tol for _, m in margins(region, r))


def nonempty_subsets(k: int) -> list[tuple[int, ...]]:
    if k > MAX_DIMENSION:
        raise ValueError(f"at most {MAX_DIMENSION} users supported")
    return [c for size in range(1, k + 1) for c in itertools.combinations(range(k), size)]


def shift_region(region: RateRegion, delta: Number) -> RateRegion:
    offset = tuple(o + delta for o in region.offset)
    return RateRegion(region.dimension, region.inequalities, offset, region.names)


def _fold_offset(region: RateRegion) -> RateRegion:
    ineqs = []
    for q in region.inequalities:
        add = [region.offset[i] for i in q.subset]
        total = sum(add, Fraction(0)) if _exact(*add) else sum(float(a) for a in add)
        ineqs.append(Inequality(q.subset, q.bound + total, q.label))
    return RateRegion(region.dimension, tuple(ineqs), (Fraction(0),) * region.dimension, region.names)


def intersect(a: RateRegion, b: RateRegion) -> RateRegion:
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    if a.names != b.names:
        raise ValueError("regions use different coordinate names")
    if a.offset != b.offset:
        a, b = _fold_offset(a), _fold_offset(b)
    return RateRegion(a.dimension, a.inequalities + b.inequalities, a.offset, a.names)


def mac_region_from_code(d: DistributionTable, messages: Sequence[str], output: Sequence[str]) -> RateRegion:
    """``sum_{s in A} r_s <= I(M_A; W | M_{A^c})`` for every nonempty ``A``.

    The region is evaluated at the distribution in ``d`` only; no time
    sharing.
    """
    messages, output = list(messages), list(output)
    if not independent(d, [[m] for m in messages]):
        raise ValueError("messages are not independent in this distribution")
    ineqs = []
    for subset in nonempty_subsets(len(messages)):
        a = [messages[i] for i in subset]
        rest = [m for i, m in enumerate(messages) if i not in subset]
        if rest:
            bound = conditional_mutual_information(d, a, output, rest)
        else:
            bound = mutual_information(d, a, output)
        ineqs.append(Inequality(subset, bound, f"I({','.join(a)};W|rest)"))
    return RateRegion(len(messages), tuple(ineqs), names=tuple(messages))


def r_mac_vector(d: DistributionTable, messages: Sequence[str], output: Sequence[str]) -> list[float]:
    return [mutual_information(d, m, list(output)) for m in messages]


@dataclass(frozen=True)
class DeterministicBC:
    """Input alphabet ``range(input_size)``; receiver ``s`` sees ``functions[s][x]``."""

    input_size: int
    functions: tuple[tuple[int, ...], ...]
    p_x: tuple[Fraction, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "functions", tuple(tuple(int(y) for y in f) for f in self.functions))
        if not self.p_x:
            object.__setattr__(self, "p_x", (Fraction(1, self.input_size),) * self.input_size)
        object.__setattr__(self, "p_x", tuple(Fraction(p) for p in self.p_x))
        for f in self.functions:
            if len(f) != self.input_size:
                raise ValueError("receiver function is not total on the input alphabet")
        if len(self.p_x) != self.input_size or sum(self.p_x) != 1 or min(self.p_x) < 0:
            raise ValueError("input distribution must be a pmf on the input alphabet")

    @property
    def k(self) -> int:
        return len(self.functions)

    def with_input(self, p_x: Sequence[Fraction]) -> DeterministicBC:
        return DeterministicBC(self.input_size, self.functions, tuple(p_x))

    def output_table(self) -> DistributionTable:
        sizes = [max(f) + 1 for f in self.functions]
        probs: dict[tuple[int, ...], Fraction] = {}
        for x, p in enumerate(self.p_x):
            if p:
                key = tuple(f[x] for f in self.functions)
                probs[key] = probs.get(key, Fraction(0)) + p
        return DistributionTable(tuple((f"Y{s + 1}", sizes[s]) for s in range(self.k)), probs)


def dbc_region(bc: DeterministicBC, names: Sequence[str] = ()) -> RateRegion:
    """``sum_{s in A} R_s <= H(Y_A)`` at the given input distribution."""
    d = bc.output_table()
    ineqs = []
    for subset in nonempty_subsets(bc.k):
        ys = [f"Y{i + 1}" for i in subset]
        ineqs.append(Inequality(subset, entropy(d, ys), f"H({','.join(ys)})"))
    return RateRegion(bc.k, tuple(ineqs), names=tuple(names))


def dbc_member_any(bc: DeterministicBC, r: Sequence[Number], candidates: Sequence[Sequence[Fraction]]) -> tuple[bool, tuple[Fraction, ...] | None]:
    """Is ``r`` inside the region for some candidate input distribution?"""
    for p in candidates:
        if region_membership(dbc_region(bc.with_input(p)), r):
            return True, tuple(p)
    return False, None


def grid_distributions(size: int, denominator: int) -> list[tuple[Fraction, ...]]:
    """All pmfs on ``range(size)`` with probabilities in multiples of ``1/denominator``."""
    out = []
    for cuts in itertools.combinations(range(denominator + size - 1), size - 1):
        prev, parts = -1, []
        for c in cuts + (denominator + size - 1,):
            parts.append(c - prev - 1)
            prev = c
        out.append(tuple(Fraction(x, denominator) for x in parts))
    return out


def dbc_from_table(d: DistributionTable, inputs: Sequence[str], outputs: Sequence[str]) -> tuple[DeterministicBC, dict[tuple[int, ...], int]]:
    """Read a deterministic broadcast channel off a joint table.

    The input alphabet is the support of ``inputs`` (indexed in sorted
    order); raises if some input value maps to more than one output tuple.
    """
    joint = d.marginal(list(inputs) + list(outputs))
    k_in = len(inputs)
    fmap: dict[tuple[int, ...], tuple[int, ...]] = {}
    px: dict[tuple[int, ...], Fraction] = {}
    for o, p in joint.items():
        x, y = o[:k_in], o[k_in:]
        if fmap.setdefault(x, y) != y:
            raise ValueError("outputs are not a deterministic function of the inputs")
        px[x] = px.get(x, Fraction(0)) + p
    xs = sorted(px)
    index = {x: i for i, x in enumerate(xs)}
    functions = tuple(tuple(fmap[x][s] for x in xs) for s in range(len(outputs)))
    return DeterministicBC(len(xs), functions, tuple(px[x] for x in xs)), index
