"""Constructive (L, S, T, R) symplectic decomposition of a CSS gauge code.

The rows of ``(L_X; S_X; T_X; R_X)`` and ``(L_Z; T_Z; S_Z; R_Z)`` are dual
bases of F_2^n: every X row anticommutes with exactly its partner Z row.
``S`` generates the stabilizers, ``T`` the error operators adjacent to them,
``R`` the reduced gauge group and ``L`` the logical operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .f2core import (
    BitMatrix,
    NoSolution,
    kernel,
    mod_span_projector,
    row_reduce,
    same_rowspan,
    solve,
)
from .gaugecode import CssCode


class DecompositionError(RuntimeError):
    """A step of the decomposition had no solution (input is not a valid CSS gauge code)."""

    def __init__(self, step: str, detail: str = ""):
        self.step = step
        super().__init__(f"decomposition failed at step {step!r}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class LstrDecomposition:
    l_x: BitMatrix
    l_z: BitMatrix
    s_x: BitMatrix
    s_z: BitMatrix
    t_x: BitMatrix  # paired with s_z
    t_z: BitMatrix  # paired with s_x
    r_x: BitMatrix
    r_z: BitMatrix
    s_x_pivots: tuple[int, ...] = field(default=())
    s_z_pivots: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.l_x.ncols

    @property
    def k(self) -> int:
        return self.l_x.nrows

    @property
    def m_x(self) -> int:
        return self.s_x.nrows

    @property
    def m_z(self) -> int:
        return self.s_z.nrows

    @property
    def r(self) -> int:
        return self.r_x.nrows

    def counts(self) -> dict[str, int]:
        return {"n": self.n, "k": self.k, "m_x": self.m_x, "m_z": self.m_z, "r": self.r}

    def x_stack(self) -> BitMatrix:
        return self.l_x.vstack(self.s_x, self.t_x, self.r_x)

    def z_stack(self) -> BitMatrix:
        return self.l_z.vstack(self.t_z, self.s_z, self.r_z)

    def matrices(self) -> dict[str, BitMatrix]:
        return {
            "L_X": self.l_x, "L_Z": self.l_z, "S_X": self.s_x, "S_Z": self.s_z,
            "T_X": self.t_x, "T_Z": self.t_z, "R_X": self.r_x, "R_Z": self.r_z,
        }


def find_stabilizers(g_x: BitMatrix, g_z: BitMatrix) -> tuple[BitMatrix, BitMatrix]:
    """Row-reduced generators of the X and Z stabilizer groups.

    A Z stabilizer is ``v @ g_z`` with ``v`` in the kernel of ``g_x @ g_z.T``
    (it commutes with every X generator); symmetrically for X.
    """
    def central(g_self: BitMatrix, g_other: BitMatrix) -> BitMatrix:
        if g_self.nrows == 0:
            return BitMatrix.empty(g_self.ncols)
        comm = g_other.dot_t(g_self)  # |other| x |self|
        coeffs = kernel(comm)
        return row_reduce(coeffs @ g_self)[0]

    return central(g_x, g_z), central(g_z, g_x)


def _solve(step: str, a: BitMatrix, b: BitMatrix) -> BitMatrix:
    try:
        return solve(a, b)
    except NoSolution as exc:
        raise DecompositionError(step, str(exc)) from None


def _block_rhs(sizes: list[int], which: int) -> BitMatrix:
    """Stacked right-hand side with an identity in block ``which`` and zeros elsewhere."""
    q = sizes[which]
    rows = []
    for b, size in enumerate(sizes):
        rows.extend((1 << i) if b == which else 0 for i in range(size))
    return BitMatrix(tuple(rows), q)


def decompose(code: CssCode) -> LstrDecomposition:
    n = code.n
    g_x, g_z = code.g_x, code.g_z

    # (1) stabilizers
    s_x, s_z = find_stabilizers(g_x, g_z)
    _, px_piv = row_reduce(s_x)
    _, pz_piv = row_reduce(s_z)

    # (2) projectors modulo the stabilizer spans
    p_x = mod_span_projector(s_x, n)
    p_z = mod_span_projector(s_z, n)

    # (3) Z logicals: kernel of G_X modulo span(S_Z)
    l_z = row_reduce(kernel(g_x) @ p_z)[0]
    k = l_z.nrows

    # (4) X logicals
    a = l_z.vstack(g_z)
    l_x = _solve("L_X", a, _block_rhs([k, g_z.nrows], 0))

    # (5) reduced gauge generators
    r_x = row_reduce(g_x @ p_x)[0]
    r_z_aux = row_reduce(g_z @ p_z)[0]
    if r_x.nrows != r_z_aux.nrows:
        raise DecompositionError("R", f"X and Z reduced gauge ranks differ ({r_x.nrows} vs {r_z_aux.nrows})")

    # (6) X error operators, dual to S_Z
    a = l_z.vstack(s_z, r_z_aux)
    t_x = _solve("T_X", a, _block_rhs([k, s_z.nrows, r_z_aux.nrows], 1))

    # (7) Z error operators and (8) Z reduced gauge, against the full X stack
    x_stack = l_x.vstack(s_x, t_x, r_x)
    sizes = [k, s_x.nrows, t_x.nrows, r_x.nrows]
    if sum(sizes) != n:
        raise DecompositionError("count", f"k + m_x + m_z + r = {sum(sizes)} != n = {n}")
    t_z = _solve("T_Z", x_stack, _block_rhs(sizes, 1))
    r_z = _solve("R_Z", x_stack, _block_rhs(sizes, 3))

    return LstrDecomposition(
        l_x=l_x, l_z=l_z, s_x=s_x, s_z=s_z, t_x=t_x, t_z=t_z, r_x=r_x, r_z=r_z,
        s_x_pivots=tuple(px_piv), s_z_pivots=tuple(pz_piv),
    )


@dataclass
class VerifyReport:
    checks: dict[str, bool] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks[name] = passed
        if not passed:
            self.failures[name] = detail

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": dict(self.checks), "failures": dict(self.failures)}


def _first_nonzero(m: BitMatrix) -> tuple[int, int] | None:
    for i, row in enumerate(m.rows):
        if row:
            return i, (row & -row).bit_length() - 1
    return None


def verify(dec: LstrDecomposition, code: CssCode) -> VerifyReport:
    """Check every structural invariant of ``dec`` against ``code``."""
    report = VerifyReport()
    n = code.n
    shapes_ok = all(m.ncols == n for m in dec.matrices().values()) and (
        dec.l_z.nrows == dec.k and dec.t_x.nrows == dec.m_z
        and dec.t_z.nrows == dec.m_x and dec.r_z.nrows == dec.r
    )
    report.add("shapes", shapes_ok, "matrix shapes are inconsistent")
    if not shapes_ok:
        return report

    report.add("count", dec.k + dec.m_x + dec.m_z + dec.r == n,
               f"k + m_x + m_z + r = {dec.k + dec.m_x + dec.m_z + dec.r} != {n}")

    prod = dec.x_stack().dot_t(dec.z_stack())
    if prod.shape == (n, n):
        diff = prod + BitMatrix.identity(n)
        bad = _first_nonzero(diff)
        labels = (["L"] * dec.k + ["S_X"] * dec.m_x + ["T_X"] * dec.m_z + ["R_X"] * dec.r,
                  ["L"] * dec.k + ["T_Z"] * dec.m_x + ["S_Z"] * dec.m_z + ["R_Z"] * dec.r)
        detail = "" if bad is None else (
            f"row pair (x-row {bad[0]} [{labels[0][bad[0]]}], z-row {bad[1]} [{labels[1][bad[1]]}])"
        )
        report.add("lstr_identity", bad is None, detail)
    else:
        report.add("lstr_identity", False, f"product has shape {prod.shape}")

    report.add("span_x", same_rowspan(dec.s_x.vstack(dec.r_x), code.g_x),
               "span(S_X) + span(R_X) != span(G_X)")
    report.add("span_z", same_rowspan(dec.s_z.vstack(dec.r_z), code.g_z),
               "span(S_Z) + span(R_Z) != span(G_Z)")

    c = dec.s_z.dot_t(code.g_x)
    bad = _first_nonzero(c)
    report.add("s_z_central", bad is None, "" if bad is None else f"S_Z row {bad[0]} vs G_X row {bad[1]}")
    c = dec.s_x.dot_t(code.g_z)
    bad = _first_nonzero(c)
    report.add("s_x_central", bad is None, "" if bad is None else f"S_X row {bad[0]} vs G_Z row {bad[1]}")

    c = dec.r_z.dot_t(dec.t_x)
    bad = _first_nonzero(c)
    report.add("r_z_t_x_orthogonal", bad is None, "" if bad is None else f"R_Z row {bad[0]} vs T_X row {bad[1]}")
    return report
