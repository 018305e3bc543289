"""Dense GF(2) matrices with bit-packed rows.

A row is stored as a Python int: bit ``j`` of row ``i`` is entry ``(i, j)``.
Vectors follow the same convention (bit ``j`` is coordinate ``j``), which
makes concatenation of blocks a shift-and-or.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def _mask(width: int) -> int:
    return (1 << width) - 1


def bits_to_int(bits: Iterable[int]) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b & 1:
            out |= 1 << j
    return out


def int_to_bits(x: int, width: int) -> tuple[int, ...]:
    return tuple((x >> j) & 1 for j in range(width))


def _as_vec(x: int | Sequence[int]) -> int:
    return x if isinstance(x, int) else bits_to_int(x)


@dataclass(frozen=True)
class Gf2Matrix:
    nrows: int
    ncols: int
    data: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative matrix dimension")
        if len(self.data) != self.nrows:
            raise ValueError(f"expected {self.nrows} rows, got {len(self.data)}")
        m = _mask(self.ncols)
        for row in self.data:
            if row < 0 or row & ~m:
                raise ValueError("row has bits outside the column range")

    # construction -----------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> Gf2Matrix:
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def identity(cls, size: int) -> Gf2Matrix:
        return cls(size, size, tuple(1 << i for i in range(size)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> Gf2Matrix:
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
        return cls(len(rows), ncols, tuple(bits_to_int(r) for r in rows))

    @classmethod
    def from_columns(cls, columns: Sequence[int], nrows: int) -> Gf2Matrix:
        """Build a matrix whose column ``j`` is the bit vector ``columns[j]``."""
        data = [0] * nrows
        for j, col in enumerate(columns):
            for i in range(nrows):
                if (col >> i) & 1:
                    data[i] |= 1 << j
        return cls(nrows, len(columns), tuple(data))

    @classmethod
    def from_text(cls, text: str, ncols: int | None = None) -> Gf2Matrix:
        """Parse rows of '0'/'1' characters separated by newlines.

        An empty string is a matrix with zero rows; pass ``ncols`` to give it
        a width.
        """
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        for ln in lines:
            if set(ln) - {"0", "1"}:
                raise ValueError(f"invalid matrix row {ln!r}")
        if not lines:
            return cls.zeros(0, ncols or 0)
        rows = [[int(c) for c in ln] for ln in lines]
        if ncols is not None and len(rows[0]) != ncols:
            raise ValueError(f"expected {ncols} columns, got {len(rows[0])}")
        return cls.from_rows(rows)

    @classmethod
    def random(cls, nrows: int, ncols: int, rng: random.Random) -> Gf2Matrix:
        return cls(nrows, ncols, tuple(rng.getrandbits(ncols) if ncols else 0 for _ in range(nrows)))

    # views --------------------------------------------------------------

    def to_text(self) -> str:
        return "\n".join("".join(str((row >> j) & 1) for j in range(self.ncols)) for row in self.data)

    def to_list(self) -> list[list[int]]:
        return [list(int_to_bits(row, self.ncols)) for row in self.data]

    def to_numpy(self) -> np.ndarray:
        return np.array(self.to_list(), dtype=np.uint8).reshape(self.nrows, self.ncols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return (self.data[i] >> j) & 1

    def column(self, j: int) -> int:
        return bits_to_int((row >> j) & 1 for row in self.data)

    def transpose(self) -> Gf2Matrix:
        return Gf2Matrix.from_columns(self.data, self.ncols)

    @property
    def T(self) -> Gf2Matrix:
        return self.transpose()

    def is_zero(self) -> bool:
        return not any(self.data)

    def col_slice(self, start: int, stop: int) -> Gf2Matrix:
        m = _mask(stop - start)
        return Gf2Matrix(self.nrows, stop - start, tuple((row >> start) & m for row in self.data))

    def row_slice(self, start: int, stop: int) -> Gf2Matrix:
        return Gf2Matrix(stop - start, self.ncols, self.data[start:stop])

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: Gf2Matrix) -> Gf2Matrix:
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("dimension mismatch in addition")
        return Gf2Matrix(self.nrows, self.ncols, tuple(a ^ b for a, b in zip(self.data, other.data)))

    def __matmul__(self, other: Gf2Matrix) -> Gf2Matrix:
        return mat_mul(self, other)


def hstack(blocks: Sequence[Gf2Matrix], nrows: int | None = None) -> Gf2Matrix:
    """Concatenate column blocks; the first block takes the low columns."""
    if not blocks:
        return Gf2Matrix.zeros(nrows or 0, 0)
    rows = blocks[0].nrows
    if any(b.nrows != rows for b in blocks):
        raise ValueError("dimension mismatch in hstack")
    data = [0] * rows
    shift = 0
    for b in blocks:
        for i, r in enumerate(b.data):
            data[i] |= r << shift
        shift += b.ncols
    return Gf2Matrix(rows, shift, tuple(data))


def vstack(blocks: Sequence[Gf2Matrix], ncols: int | None = None) -> Gf2Matrix:
    if not blocks:
        return Gf2Matrix.zeros(0, ncols or 0)
    cols = blocks[0].ncols
    if any(b.ncols != cols for b in blocks):
        raise ValueError("dimension mismatch in vstack")
    return Gf2Matrix(sum(b.nrows for b in blocks), cols, tuple(r for b in blocks for r in b.data))


def block_diag_repeat(m: Gf2Matrix, times: int) -> Gf2Matrix:
    """``kron(I_times, m)``."""
    data = []
    for t in range(times):
        data.extend(r << (t * m.ncols) for r in m.data)
    return Gf2Matrix(m.nrows * times, m.ncols * times, tuple(data))


def parity(x: int) -> int:
    return x.bit_count() & 1


def mat_vec(a: Gf2Matrix, x: int | Sequence[int]) -> int:
    x = _as_vec(x)
    if x >> a.ncols:
        raise ValueError("vector longer than matrix width")
    out = 0
    for i, row in enumerate(a.data):
        if (row & x).bit_count() & 1:
            out |= 1 << i
    return out


def mat_vec_many(a: Gf2Matrix, xs: np.ndarray) -> np.ndarray:
    """Apply ``a`` to every vector in a uint64 array at once."""
    if a.ncols > 64 or a.nrows > 64:
        raise ValueError("vectorised product limited to 64 bits")
    xs = xs.astype(np.uint64, copy=False)
    out = np.zeros(xs.shape, dtype=np.uint64)
    for i, row in enumerate(a.data):
        if row:
            bit = np.bitwise_count(xs & np.uint64(row)).astype(np.uint64) & np.uint64(1)
            out |= bit << np.uint64(i)
    return out


def mat_mul(a: Gf2Matrix, b: Gf2Matrix) -> Gf2Matrix:
    if a.ncols != b.nrows:
        raise ValueError(f"cannot multiply {a.nrows}x{a.ncols} by {b.nrows}x{b.ncols}")
    data = []
    for row in a.data:
        acc = 0
        j = 0
        r = row
        while r:
            if r & 1:
                acc ^= b.data[j]
            r >>= 1
            j += 1
        data.append(acc)
    return Gf2Matrix(a.nrows, b.ncols, tuple(data))


def _rref(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    work = list(rows)
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        pivot = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(len(work)):
            if i != r and work[i] & bit:
                work[i] ^= work[r]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def rank(m: Gf2Matrix) -> int:
    return len(_rref(list(m.data), m.ncols)[1])


def kernel_basis(m: Gf2Matrix) -> list[int]:
    """Basis of the right null space, one vector per free column in ascending order."""
    reduced, pivots = _rref(list(m.data), m.ncols)
    pivot_set = set(pivots)
    basis = []
    for f in range(m.ncols):
        if f in pivot_set:
            continue
        v = 1 << f
        for row, p in zip(reduced, pivots):
            if (row >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return basis


def solve(a: Gf2Matrix, y: int | Sequence[int]) -> int | None:
    """Return some ``x`` with ``a @ x == y``, or ``None`` when the system is inconsistent."""
    y = _as_vec(y)
    if y >> a.nrows:
        raise ValueError("right-hand side longer than matrix height")
    aug_bit = 1 << a.ncols
    rows = [row | (aug_bit if (y >> i) & 1 else 0) for i, row in enumerate(a.data)]
    reduced, pivots = _rref(rows, a.ncols)
    x = 0
    for row, p in zip(reduced, pivots):
        if row & aug_bit:
            x |= 1 << p
    # a zero row carrying the augmented bit means no solution
    consistent = mat_vec(a, x) == y
    return x if consistent else None


def solve_left(a: Gf2Matrix, target: Gf2Matrix) -> Gf2Matrix | None:
    """Find ``L`` with ``L @ a == target`` (row by row), or ``None``."""
    if a.ncols != target.ncols:
        raise ValueError("dimension mismatch in solve_left")
    at = a.transpose()
    rows = []
    for t in target.data:
        x = solve(at, t)
        if x is None:
            return None
        rows.append(x)
    return Gf2Matrix(target.nrows, a.nrows, tuple(rows))


def left_inverse(m: Gf2Matrix) -> Gf2Matrix:
    """Left inverse of a full-column-rank matrix."""
    inv = solve_left(m, Gf2Matrix.identity(m.ncols))
    if inv is None:
        raise ValueError("matrix does not have full column rank")
    return inv


__all__ = [
    "Gf2Matrix",
    "bits_to_int",
    "block_diag_repeat",
    "hstack",
    "int_to_bits",
    "kernel_basis",
    "left_inverse",
    "mat_mul",
    "mat_vec",
    "mat_vec_many",
    "parity",
    "rank",
    "solve",
    "solve_left",
    "vstack",
]
