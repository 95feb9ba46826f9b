"""Dense GF(2) linear algebra on bit-packed rows.

Each row of a :class:`BitMatrix` is a Python ``int`` used as a bitset:
bit ``j`` of the integer is the entry in column ``j``.  Row addition is a
single XOR, which keeps elimination fast for the few hundred columns the
codes in this package need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class NoSolution(ValueError):
    """Raised when a GF(2) linear system is inconsistent."""


def parity(x: int) -> int:
    return x.bit_count() & 1


def weight(v) -> int:
    """Number of nonzero entries of a bit-vector (int, string or array)."""
    if isinstance(v, int):
        return v.bit_count()
    if isinstance(v, str):
        return v.count("1")
    return int(np.count_nonzero(v))


def bits_to_int(bits: str) -> int:
    """Parse ``'0110'`` (leftmost character = column 0) into a row int."""
    value = 0
    for j, ch in enumerate(bits):
        if ch == "1":
            value |= 1 << j
        elif ch != "0":
            raise ValueError(f"invalid bit character {ch!r} in {bits!r}")
    return value


def int_to_bits(value: int, ncols: int) -> str:
    return "".join("1" if (value >> j) & 1 else "0" for j in range(ncols))


@dataclass(frozen=True)
class BitMatrix:
    """Immutable dense matrix over GF(2) with bit-packed rows."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        limit = 1 << self.ncols
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#x} has bits beyond {self.ncols} columns")
        object.__setattr__(self, "rows", rows)

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> BitMatrix:
        return cls((0,) * nrows, ncols)

    @classmethod
    def empty(cls, ncols: int) -> BitMatrix:
        return cls((), ncols)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def from_strings(cls, strings: Iterable[str], ncols: int | None = None) -> BitMatrix:
        strings = list(strings)
        if ncols is None:
            if not strings:
                raise ValueError("ncols is required for an empty matrix")
            ncols = len(strings[0])
        for s in strings:
            if len(s) != ncols:
                raise ValueError(f"row {s!r} does not have length {ncols}")
        return cls(tuple(bits_to_int(s) for s in strings), ncols)

    @classmethod
    def from_array(cls, array) -> BitMatrix:
        a = np.asarray(array, dtype=np.uint8) % 2
        if a.ndim != 2:
            raise ValueError("expected a 2D array")
        rows = tuple(sum(1 << int(j) for j in np.flatnonzero(row)) for row in a)
        return cls(rows, a.shape[1])

    @classmethod
    def from_supports(cls, supports: Iterable[Iterable[int]], ncols: int) -> BitMatrix:
        rows = []
        for support in supports:
            r = 0
            for j in support:
                r ^= 1 << j
            rows.append(r)
        return cls(tuple(rows), ncols)

    # -- views ----------------------------------------------------------
    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __len__(self) -> int:
        return self.nrows

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return BitMatrix(self.rows[i], self.ncols)
        return self.rows[i]

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in range(self.ncols):
                if (r >> j) & 1:
                    out[i, j] = 1
        return out

    def to_strings(self) -> list[str]:
        return [int_to_bits(r, self.ncols) for r in self.rows]

    def __repr__(self) -> str:
        body = ", ".join(self.to_strings())
        return f"BitMatrix({self.nrows}x{self.ncols}: [{body}])"

    # -- algebra --------------------------------------------------------
    def __add__(self, other: BitMatrix) -> BitMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return BitMatrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        """Ordinary matrix product ``self @ other``."""
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        for r in self.rows:
            acc = 0
            j = 0
            while r:
                if r & 1:
                    acc ^= other.rows[j]
                r >>= 1
                j += 1
            out.append(acc)
        return BitMatrix(tuple(out), other.ncols)

    def dot_t(self, other: BitMatrix) -> BitMatrix:
        """Return ``self @ other.T``: entry (i, j) is the parity of row_i & other_j."""
        if self.ncols != other.ncols:
            raise ValueError(f"column mismatch {self.ncols} vs {other.ncols}")
        out = []
        for a in self.rows:
            acc = 0
            for j, b in enumerate(other.rows):
                if (a & b).bit_count() & 1:
                    acc |= 1 << j
            out.append(acc)
        return BitMatrix(tuple(out), other.nrows)

    @property
    def T(self) -> BitMatrix:
        out = [0] * self.ncols
        for i, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    out[j] |= 1 << i
                r >>= 1
                j += 1
        return BitMatrix(tuple(out), self.nrows)

    def vstack(self, *others: BitMatrix) -> BitMatrix:
        rows = list(self.rows)
        for o in others:
            if o.ncols != self.ncols:
                raise ValueError("column mismatch in vstack")
            rows.extend(o.rows)
        return BitMatrix(tuple(rows), self.ncols)

    def permute_columns(self, perm: Sequence[int]) -> BitMatrix:
        """Move column ``j`` to position ``perm[j]``."""
        out = []
        for r in self.rows:
            acc = 0
            for j in range(self.ncols):
                if (r >> j) & 1:
                    acc |= 1 << perm[j]
            out.append(acc)
        return BitMatrix(tuple(out), self.ncols)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def rank(self) -> int:
        return len(row_reduce(self)[1])


def _rref(rows: list[int], pivot_cols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form on the low ``pivot_cols`` bits.

    Leftmost pivot, topmost candidate row.  Bits above ``pivot_cols`` ride
    along as an augmented block.  Zero rows (in the pivot block) are kept at
    the bottom so callers can inspect the augmented part.
    """
    work = list(rows)
    pivots: list[int] = []
    top = 0
    for col in range(pivot_cols):
        bit = 1 << col
        found = -1
        for i in range(top, len(work)):
            if work[i] & bit:
                found = i
                break
        if found < 0:
            continue
        work[top], work[found] = work[found], work[top]
        prow = work[top]
        for i in range(len(work)):
            if i != top and work[i] & bit:
                work[i] ^= prow
        pivots.append(col)
        top += 1
        if top == len(work):
            break
    return work, pivots


def row_reduce(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form with zero rows removed, plus pivot columns."""
    work, pivots = _rref(list(m.rows), m.ncols)
    return BitMatrix(tuple(work[: len(pivots)]), m.ncols), pivots


def rank(m: BitMatrix) -> int:
    return len(row_reduce(m)[1])


def kernel(m: BitMatrix) -> BitMatrix:
    """Basis (as rows) of ``{x : m x^T = 0}``, one row per free column."""
    r, pivots = row_reduce(m)
    pivot_set = set(pivots)
    basis = []
    for f in range(m.ncols):
        if f in pivot_set:
            continue
        x = 1 << f
        for row, p in zip(r.rows, pivots):
            if (row >> f) & 1:
                x |= 1 << p
        basis.append(x)
    return BitMatrix(tuple(basis), m.ncols)


def solve(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Find ``x`` with ``a @ x.T == b``; free variables are set to zero.

    ``b`` holds one row per row of ``a``; its column count is the number of
    right-hand sides, which is also the row count of the returned ``x``.

    Raises
    ------
    NoSolution
        If some right-hand side is inconsistent with ``a``.
    """
    if a.nrows != b.nrows:
        raise ValueError(f"a has {a.nrows} rows but b has {b.nrows}")
    n, q = a.ncols, b.ncols
    aug = [ra | (rb << n) for ra, rb in zip(a.rows, b.rows)]
    work, pivots = _rref(aug, n)
    mask = (1 << n) - 1
    for row in work[len(pivots):]:
        if row >> n:
            raise NoSolution("inconsistent GF(2) system")
        assert not row & mask
    x = [0] * q
    for row, p in zip(work, pivots):
        rhs = row >> n
        j = 0
        while rhs:
            if rhs & 1:
                x[j] |= 1 << p
            rhs >>= 1
            j += 1
    return BitMatrix(tuple(x), n)


def is_rref(s: BitMatrix) -> bool:
    r, _ = row_reduce(s)
    return r.rows == s.rows


def mod_span_projector(s: BitMatrix, n: int | None = None) -> BitMatrix:
    """Projector ``P = I + A^T S`` onto the complement of ``rowspan(s)``.

    ``A`` marks the leading 1 of each row of ``s``, so ``v @ P`` clears the
    pivot columns of ``v`` by adding pivot rows.  ``s`` must already be in
    reduced row echelon form.
    """
    n = s.ncols if n is None else n
    if s.ncols != n:
        raise ValueError(f"s has {s.ncols} columns, expected {n}")
    r, pivots = row_reduce(s)
    if r.rows != s.rows:
        raise ValueError("s must be in reduced row echelon form")
    rows = [1 << c for c in range(n)]
    for row, p in zip(s.rows, pivots):
        rows[p] ^= row
    return BitMatrix(tuple(rows), n)


def in_rowspan(v: int, m: BitMatrix) -> bool:
    r, pivots = row_reduce(m)
    for row, p in zip(r.rows, pivots):
        if (v >> p) & 1:
            v ^= row
    return v == 0


def same_rowspan(a: BitMatrix, b: BitMatrix) -> bool:
    return a.ncols == b.ncols and row_reduce(a)[0].rows == row_reduce(b)[0].rows
