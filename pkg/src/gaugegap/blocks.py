"""Sector Hamiltonian blocks as matrix-free symmetric operators.

A sector ``(t_x, t_z)`` labels which stabilizers are frustrated.  Its block
acts on ``2^r`` basis states ``|v R_X + t_X>``, identified with integers
whose bit ``i`` is the coefficient of row ``i`` of ``R_X``.  X-type terms
translate the index by ``g_X R_Z^T`` with sign ``(-1)^(t_Z . g_X)``; Z-type
terms contribute a diagonal ``sum_g J_g (-1)^syndrome``.

Everything is written in the neg-Hamiltonian convention: the ground state
has the largest eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .decompose import LstrDecomposition
from .f2core import BitMatrix, bits_to_int, int_to_bits, parity
from .gaugecode import CssCode

DENSE_CAP = 14
FULL_DENSE_CAP = 14
DIAG_BUDGET_BYTES = 1 << 30


@dataclass(frozen=True, order=True)
class SectorLabel:
    """Coefficient vectors over the rows of ``T_X`` (``m_z`` bits) and ``T_Z`` (``m_x`` bits).

    Bit ``i`` of ``tx`` selects row ``i`` of ``T_X``.
    """

    tx: int
    tz: int
    m_z: int
    m_x: int

    def __post_init__(self):
        if self.tx >> self.m_z or self.tz >> self.m_x or self.tx < 0 or self.tz < 0:
            raise ValueError(f"sector coefficients do not fit (m_z={self.m_z}, m_x={self.m_x})")

    @classmethod
    def zero(cls, dec: LstrDecomposition) -> SectorLabel:
        return cls(0, 0, dec.m_z, dec.m_x)

    @classmethod
    def parse(cls, text: str, dec: LstrDecomposition) -> SectorLabel:
        """Parse ``'<tx-bits>,<tz-bits>'``; either side may be empty (all zero)."""
        tx_s, sep, tz_s = text.partition(",")
        if not sep:
            raise ValueError(f"sector must look like '<tx-bits>,<tz-bits>', got {text!r}")
        tx_s, tz_s = tx_s.strip(), tz_s.strip()
        for bits, size, what in ((tx_s, dec.m_z, "tx"), (tz_s, dec.m_x, "tz")):
            if bits and len(bits) != size:
                raise ValueError(f"{what} needs {size} bits, got {len(bits)}")
        return cls(bits_to_int(tx_s) if tx_s else 0, bits_to_int(tz_s) if tz_s else 0, dec.m_z, dec.m_x)

    def __str__(self) -> str:
        return f"{int_to_bits(self.tx, self.m_z)},{int_to_bits(self.tz, self.m_x)}"

    @property
    def is_zero(self) -> bool:
        return self.tx == 0 and self.tz == 0


def combine_rows(m: BitMatrix, coeffs: int) -> int:
    """Sum of the rows of ``m`` selected by the bits of ``coeffs``."""
    acc = 0
    i = 0
    while coeffs:
        if coeffs & 1:
            acc ^= m.rows[i]
        coeffs >>= 1
        i += 1
    return acc


def _project(vec: int, rows: Sequence[int]) -> int:
    """Inner products of ``vec`` with each row, packed as bits."""
    out = 0
    for i, row in enumerate(rows):
        if (vec & row).bit_count() & 1:
            out |= 1 << i
    return out


@dataclass
class BlockOperator:
    """Symmetric operator ``out[u] = diag(u) in[u] + sum_s c_s in[u ^ s]``.

    ``translations`` lists one ``(shift, sign, coeff)`` per X-type term.
    The Z-type diagonal is ``sum_z J_z (-1)^(parity(masks_z & u) ^ offset_z)``.
    """

    nbits: int
    translations: list[tuple[int, int, float]]
    diag_masks: list[int]
    diag_offsets: list[int]
    diag_weights: list[float]
    diag_budget: int = DIAG_BUDGET_BYTES
    label: str = ""
    _shifts: np.ndarray = field(init=False, repr=False)
    _coeffs: np.ndarray = field(init=False, repr=False)
    _diag: np.ndarray | None = field(init=False, repr=False, default=None)
    _zmasks: np.ndarray = field(init=False, repr=False)
    _zcoeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        merged: dict[int, float] = {}
        for shift, sign, coeff in self.translations:
            merged[shift] = merged.get(shift, 0.0) + sign * coeff
        items = sorted((s, c) for s, c in merged.items() if c != 0.0)
        self._shifts = np.array([s for s, _ in items], dtype=np.int64)
        self._coeffs = np.array([c for _, c in items], dtype=np.float64)
        zmerged: dict[int, float] = {}
        for mask, off, w in zip(self.diag_masks, self.diag_offsets, self.diag_weights):
            zmerged[mask] = zmerged.get(mask, 0.0) + (-w if off else w)
        zitems = sorted(zmerged.items())
        self._zmasks = np.array([m for m, _ in zitems], dtype=np.int64)
        self._zcoeffs = np.array([c for _, c in zitems], dtype=np.float64)

    @property
    def r(self) -> int:
        return self.nbits

    @property
    def dim(self) -> int:
        return 1 << self.nbits

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    @property
    def precomputes_diagonal(self) -> bool:
        return 8 * self.dim <= self.diag_budget

    def diagonal(self) -> np.ndarray:
        """Diagonal entries, via a fast Walsh-Hadamard transform of the Z terms."""
        if self._diag is not None:
            return self._diag
        d = np.zeros(self.dim)
        np.add.at(d, self._zmasks, self._zcoeffs)
        h = 1
        while h < self.dim:
            view = d.reshape(-1, 2, h)
            a = view[:, 0, :].copy()
            b = view[:, 1, :]
            view[:, 0, :] += b
            view[:, 1, :] = a - b
            h *= 2
        if self.precomputes_diagonal:
            self._diag = d
        return d

    def diagonal_max(self) -> float:
        return float(self.diagonal().max())

    def apply(self, x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        if out is None:
            out = np.empty(self.dim)
        if self.precomputes_diagonal:
            _kernels.apply_with_diag(x, self.diagonal(), self._shifts, self._coeffs, out)
        else:
            _kernels.apply_streaming(x, self._zmasks, self._zcoeffs, self._shifts, self._coeffs, out)
        return out

    __call__ = apply
    matvec = apply

    def apply_numpy(self, x: np.ndarray) -> np.ndarray:
        """Reference implementation of :meth:`apply` with plain numpy gathers."""
        x = np.asarray(x, dtype=np.float64)
        idx = np.arange(self.dim, dtype=np.int64)
        diag = np.zeros(self.dim)
        for mask, off, w in zip(self.diag_masks, self.diag_offsets, self.diag_weights):
            bits = (np.bitwise_count(idx & mask) & 1) ^ off
            diag += w * (1 - 2 * bits.astype(np.float64))
        out = diag * x
        for shift, sign, coeff in self.translations:
            out += sign * coeff * x[idx ^ shift]
        return out

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.nbits > cap:
            raise ValueError(f"dense realization limited to {cap} bits, block has {self.nbits}")
        idx = np.arange(self.dim, dtype=np.int64)
        m = np.diag(self.diagonal().copy())
        for shift, coeff in zip(self._shifts, self._coeffs):
            m[idx ^ shift, idx] += coeff
        return m

    def max_offdiag_abs(self) -> float:
        return float(np.abs(self._coeffs[self._shifts != 0]).sum()) if self._shifts.size else 0.0


def sector_vectors(dec: LstrDecomposition, sector: SectorLabel) -> tuple[int, int]:
    """The n-qubit error operators ``t_X`` and ``t_Z`` of a sector."""
    if sector.m_z != dec.m_z or sector.m_x != dec.m_x:
        raise ValueError(
            f"sector has (m_z, m_x) = ({sector.m_z}, {sector.m_x}), decomposition has ({dec.m_z}, {dec.m_x})"
        )
    return combine_rows(dec.t_x, sector.tx), combine_rows(dec.t_z, sector.tz)


def build_block(code: CssCode, dec: LstrDecomposition, sector: SectorLabel | None = None,
                diag_budget: int = DIAG_BUDGET_BYTES) -> BlockOperator:
    """Matrix-free block ``H_{t_x, t_z}`` on ``2^r`` states."""
    sector = SectorLabel.zero(dec) if sector is None else sector
    t_x, t_z = sector_vectors(dec, sector)
    r_z_rows = dec.r_z.rows
    r_x_rows = dec.r_x.rows
    translations = [
        (_project(g, r_z_rows), -1 if parity(g & t_z) else 1, w)
        for g, w in zip(code.g_x.rows, code.weights_x)
    ]
    masks = [_project(g, r_x_rows) for g in code.g_z.rows]
    offsets = [parity(g & t_x) for g in code.g_z.rows]
    return BlockOperator(
        dec.r, translations, masks, offsets, list(code.weights_z),
        diag_budget=diag_budget, label=str(sector),
    )


def gamma_component(code: CssCode, dec: LstrDecomposition, tx: int = 0,
                    cap: int = 24) -> BlockOperator:
    """Computational-basis component containing the coset of ``t_X``.

    States ``|a S_X + u R_X + t_X>`` are indexed by ``a | (u << m_x)``; every
    X term moves along an edge with weight ``+J`` (the component is
    stoquastic), Z terms give the diagonal.
    """
    nbits = dec.m_x + dec.r
    if nbits > cap:
        raise ValueError(f"component has {nbits} bits, above cap {cap}")
    t_x = combine_rows(dec.t_x, tx)
    tz_rows = dec.t_z.rows
    translations = [
        (_project(g, tz_rows) | (_project(g, dec.r_z.rows) << dec.m_x), 1, w)
        for g, w in zip(code.g_x.rows, code.weights_x)
    ]
    masks = [_project(g, dec.r_x.rows) << dec.m_x for g in code.g_z.rows]
    offsets = [parity(g & t_x) for g in code.g_z.rows]
    return BlockOperator(nbits, translations, masks, offsets, list(code.weights_z),
                         label=f"gamma[{int_to_bits(tx, dec.m_z)}]")


def full_hamiltonian_dense(code: CssCode, cap: int = FULL_DENSE_CAP) -> np.ndarray:
    """``sum_g J_g g`` in the computational basis (bit j of the index = qubit j)."""
    if code.n > cap:
        raise ValueError(f"full dense Hamiltonian limited to n <= {cap}, got {code.n}")
    dim = 1 << code.n
    idx = np.arange(dim, dtype=np.int64)
    h = np.zeros((dim, dim))
    diag = np.zeros(dim)
    for g, w in zip(code.g_z.rows, code.weights_z):
        diag += w * (1 - 2 * (np.bitwise_count(idx & g) & 1).astype(np.float64))
    h[idx, idx] = diag
    for g, w in zip(code.g_x.rows, code.weights_x):
        h[idx ^ g, idx] += w
    return h


def all_sectors(dec: LstrDecomposition):
    for tx in range(1 << dec.m_z):
        for tz in range(1 << dec.m_x):
            yield SectorLabel(tx, tz, dec.m_z, dec.m_x)
