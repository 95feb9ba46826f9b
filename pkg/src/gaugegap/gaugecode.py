"""CSS gauge code data model, lattice model builders and the code file format."""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

from .f2core import BitMatrix, bits_to_int, int_to_bits, parity
from .f2core import weight as weight  # re-exported

FORMAT_TAG = "gaugecode"
FORMAT_VERSION = "v1"


class CodeFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class PauliWord:
    x_part: int
    z_part: int

    def commutes(self, other: PauliWord) -> bool:
        return not parity((self.x_part & other.z_part) ^ (self.z_part & other.x_part))


@dataclass(frozen=True)
class CssCode:
    """A CSS gauge code on ``n`` qubits.

    ``g_x`` and ``g_z`` hold one gauge generator (Hamiltonian term) per row.
    ``weights_x``/``weights_z`` are the term coefficients.  The optional
    metadata is never needed for correctness:

    * ``stabilizer_hints_x/z`` -- a preferred stabilizer generating set
      (e.g. the lattice formulas), used to pick and label frustrated sectors;
    * ``duality`` -- a qubit permutation with ``g_x`` permuted equal to ``g_z``;
    * ``symmetries`` -- qubit permutations preserving both generator sets.
    """

    n: int
    g_x: BitMatrix
    g_z: BitMatrix
    weights_x: tuple[float, ...] | None = None
    weights_z: tuple[float, ...] | None = None
    name: str = "code"
    stabilizer_hints_x: BitMatrix | None = None
    stabilizer_hints_z: BitMatrix | None = None
    duality: tuple[int, ...] | None = None
    symmetries: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if self.g_x.ncols != self.n or self.g_z.ncols != self.n:
            raise ValueError(
                f"generator matrices must have {self.n} columns, got "
                f"{self.g_x.ncols} and {self.g_z.ncols}"
            )
        for kind, g in (("X", self.g_x), ("Z", self.g_z)):
            for i, row in enumerate(g.rows):
                if row == 0:
                    raise ValueError(f"{kind} generator {i} is all-zero")
        wx = tuple(float(w) for w in self.weights_x) if self.weights_x is not None else (1.0,) * self.g_x.nrows
        wz = tuple(float(w) for w in self.weights_z) if self.weights_z is not None else (1.0,) * self.g_z.nrows
        if len(wx) != self.g_x.nrows or len(wz) != self.g_z.nrows:
            raise ValueError("one weight per generator row is required")
        object.__setattr__(self, "weights_x", wx)
        object.__setattr__(self, "weights_z", wz)
        if self.duality is not None:
            object.__setattr__(self, "duality", tuple(int(i) for i in self.duality))
        object.__setattr__(self, "symmetries", tuple(tuple(int(i) for i in p) for p in self.symmetries))

    @property
    def num_generators(self) -> int:
        return self.g_x.nrows + self.g_z.nrows

    def generators(self) -> list[PauliWord]:
        """All generators as Pauli words, X rows first."""
        return [PauliWord(r, 0) for r in self.g_x.rows] + [PauliWord(0, r) for r in self.g_z.rows]

    def with_weights(self, scale: float) -> CssCode:
        return replace(
            self,
            weights_x=tuple(scale * w for w in self.weights_x),
            weights_z=tuple(scale * w for w in self.weights_z),
        )

    def validate(self) -> list[str]:
        """Non-fatal diagnostics (currently: repeated generator rows)."""
        warnings = []
        for kind, g in (("X", self.g_x), ("Z", self.g_z)):
            seen: dict[int, int] = {}
            for i, row in enumerate(g.rows):
                if row in seen:
                    warnings.append(f"duplicate {kind} generator: rows {seen[row]} and {i}")
                else:
                    seen[row] = i
        return warnings

    def content_hash(self) -> str:
        return hashlib.sha256(dumps_code(self).encode("utf-8")).hexdigest()


# -- model builders ---------------------------------------------------------


def _ring_translation(n: int) -> tuple[int, ...]:
    return tuple((i + 1) % n for i in range(n))


def _ring_reflection(n: int) -> tuple[int, ...]:
    return tuple((-i) % n for i in range(n))


def ising_1d(n: int) -> CssCode:
    """Transverse field Ising chain: ``X_i`` and periodic ``Z_i Z_{i+1}``."""
    if n < 3:
        raise ValueError(f"ising_1d needs n >= 3, got {n}")
    g_x = BitMatrix.from_supports([[i] for i in range(n)], n)
    g_z = BitMatrix.from_supports([[i, (i + 1) % n] for i in range(n)], n)
    return CssCode(
        n, g_x, g_z, name=f"ising1d-{n}",
        stabilizer_hints_x=BitMatrix.from_supports([range(n)], n),
        symmetries=(_ring_translation(n), _ring_reflection(n)),
    )


def xy_1d(n: int) -> CssCode:
    """Periodic XY chain with ``X_i X_{i+1}`` and ``Z_i Z_{i+1}`` terms (n even)."""
    if n < 4:
        raise ValueError(f"xy_1d needs n >= 4, got {n}")
    if n % 2:
        raise ValueError(f"xy_1d is only defined for even n (the even-n XY chain), got {n}")
    bonds = BitMatrix.from_supports([[i, (i + 1) % n] for i in range(n)], n)
    everything = BitMatrix.from_supports([range(n)], n)
    return CssCode(
        n, bonds, bonds, name=f"xy1d-{n}",
        stabilizer_hints_x=everything, stabilizer_hints_z=everything,
        duality=tuple(range(n)),
        symmetries=(_ring_translation(n), _ring_reflection(n)),
    )


def _site2(l: int):
    return lambda i, j: (i % l) * l + (j % l)


def _square_symmetries(l: int, transpose: bool) -> tuple[tuple[int, ...], ...]:
    q = _site2(l)
    shift_i = [0] * (l * l)
    shift_j = [0] * (l * l)
    flip_i = [0] * (l * l)
    flip_j = [0] * (l * l)
    swap = [0] * (l * l)
    for i, j in itertools.product(range(l), repeat=2):
        shift_i[q(i, j)] = q(i + 1, j)
        shift_j[q(i, j)] = q(i, j + 1)
        flip_i[q(i, j)] = q(-i, j)
        flip_j[q(i, j)] = q(i, -j)
        swap[q(i, j)] = q(j, i)
    perms = [shift_i, shift_j, flip_i, flip_j]
    if transpose:
        perms.append(swap)
    return tuple(tuple(p) for p in perms)


def xy_plaquette_2d(l: int) -> CssCode:
    """2D XY-plaquette model: weight-4 X and Z plaquettes on the periodic l x l torus."""
    if l < 2:
        raise ValueError(f"xy_plaquette_2d needs l >= 2, got {l}")
    if l % 2:
        raise ValueError(f"xy_plaquette_2d requires even l, got {l}")
    n = l * l
    q = _site2(l)
    plaquettes = BitMatrix.from_supports(
        [[q(i, j), q(i + 1, j), q(i, j + 1), q(i + 1, j + 1)] for i in range(l) for j in range(l)], n
    )
    # l-1 column pairs and l-2 row pairs: the 2l-3 extensive generators
    hints = [[q(i, j) for i in range(l)] + [q(i, j + 1) for i in range(l)] for j in range(l - 1)]
    hints += [[q(i, j) for j in range(l)] + [q(i + 1, j) for j in range(l)] for i in range(l - 2)]
    hint_matrix = BitMatrix.from_supports(hints, n)
    return CssCode(
        n, plaquettes, plaquettes, name=f"xy-plaquette-{l}",
        stabilizer_hints_x=hint_matrix, stabilizer_hints_z=hint_matrix,
        duality=tuple(range(n)),
        symmetries=_square_symmetries(l, transpose=True),
    )


def compass_2d(l: int) -> CssCode:
    """2D compass model: ``X_{ij}X_{i,j+1}`` and ``Z_{ij}Z_{i+1,j}`` on the periodic l x l torus."""
    if l < 2:
        raise ValueError(f"compass_2d needs l >= 2, got {l}")
    n = l * l
    q = _site2(l)
    sites = list(itertools.product(range(l), repeat=2))
    g_x = BitMatrix.from_supports([[q(i, j), q(i, j + 1)] for i, j in sites], n)
    g_z = BitMatrix.from_supports([[q(i, j), q(i + 1, j)] for i, j in sites], n)
    hints_x = BitMatrix.from_supports(
        [[q(i, j) for i in range(l)] + [q(i, j + 1) for i in range(l)] for j in range(l - 1)], n
    )
    hints_z = BitMatrix.from_supports(
        [[q(j, i) for i in range(l)] + [q(j + 1, i) for i in range(l)] for j in range(l - 1)], n
    )
    transpose = tuple(q(j, i) for i, j in sites)
    return CssCode(
        n, g_x, g_z, name=f"compass2d-{l}",
        stabilizer_hints_x=hints_x, stabilizer_hints_z=hints_z,
        duality=transpose,
        symmetries=_square_symmetries(l, transpose=False),
    )


def compass_3d(l: int) -> CssCode:
    """3D compass model on the periodic l x l x l lattice.

    X bonds run along the first and second lattice directions, Z bonds along
    the second and third.  The cyclic relabelling (i, j, k) -> (k, i, j)
    carries the X terms onto the Z terms.
    """
    if l < 2:
        raise ValueError(f"compass_3d needs l >= 2, got {l}")
    n = l ** 3

    def q(i, j, k):
        return (i % l) * l * l + (j % l) * l + (k % l)

    sites = list(itertools.product(range(l), repeat=3))
    g_x = BitMatrix.from_supports(
        [[q(i, j, k), q(i + 1, j, k)] for i, j, k in sites]
        + [[q(i, j, k), q(i, j + 1, k)] for i, j, k in sites],
        n,
    )
    g_z = BitMatrix.from_supports(
        [[q(i, j, k), q(i, j + 1, k)] for i, j, k in sites]
        + [[q(i, j, k), q(i, j, k + 1)] for i, j, k in sites],
        n,
    )
    planes = range(l)
    hints_x = BitMatrix.from_supports(
        [[q(i, j, k) for j in planes for k in planes] + [q(i + 1, j, k) for j in planes for k in planes]
         for i in range(l - 1)],
        n,
    )
    hints_z = BitMatrix.from_supports(
        [[q(j, k, i) for j in planes for k in planes] + [q(j, k, i + 1) for j in planes for k in planes]
         for i in range(l - 1)],
        n,
    )
    duality = [0] * n
    shifts = [[0] * n for _ in range(3)]
    flips = [[0] * n for _ in range(3)]
    for i, j, k in sites:
        duality[q(i, j, k)] = q(k, i, j)
        shifts[0][q(i, j, k)] = q(i + 1, j, k)
        shifts[1][q(i, j, k)] = q(i, j + 1, k)
        shifts[2][q(i, j, k)] = q(i, j, k + 1)
        flips[0][q(i, j, k)] = q(-i, j, k)
        flips[1][q(i, j, k)] = q(i, -j, k)
        flips[2][q(i, j, k)] = q(i, j, -k)
    return CssCode(
        n, g_x, g_z, name=f"compass3d-{l}",
        stabilizer_hints_x=hints_x, stabilizer_hints_z=hints_z,
        duality=tuple(duality),
        symmetries=tuple(tuple(p) for p in shifts + flips),
    )


def gauge_color_code_15() -> CssCode:
    """The bundled n=15 gauge color code (faces as gauge terms, bodies as hints; X/Z self-dual)."""
    text = resources.files("gaugegap").joinpath("data/gcc15.code").read_text(encoding="utf-8")
    return loads_code(text)


MODELS = {
    "ising1d": ising_1d,
    "xy1d": xy_1d,
    "xy-plaquette": xy_plaquette_2d,
    "compass2d": compass_2d,
    "compass3d": compass_3d,
}


def build_model(name: str, size: int | None = None) -> CssCode:
    if name == "gcc":
        if size not in (None, 15):
            raise ValueError("only the n=15 gauge color code is bundled; pass --file for others")
        return gauge_color_code_15()
    try:
        builder = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted([*MODELS, 'gcc'])}") from None
    if size is None:
        raise ValueError(f"model {name!r} needs a size")
    return builder(size)


# -- symmetry helpers ---------------------------------------------------------


def _check_perm(perm: Sequence[int], n: int) -> None:
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of {n} qubits: {list(perm)}")


def _row_multiset(g: BitMatrix, weights: Sequence[float]):
    return sorted(zip(g.rows, weights))


def check_weak_self_duality(code: CssCode, perm: Sequence[int]) -> bool:
    """True iff permuting the columns of ``g_x`` by ``perm`` gives ``g_z`` as a multiset."""
    _check_perm(perm, code.n)
    moved = code.g_x.permute_columns(perm)
    return _row_multiset(moved, code.weights_x) == _row_multiset(code.g_z, code.weights_z)


def is_automorphism(code: CssCode, perm: Sequence[int]) -> bool:
    """True iff ``perm`` maps each generator set onto itself (with weights)."""
    _check_perm(perm, code.n)
    return (
        _row_multiset(code.g_x.permute_columns(perm), code.weights_x) == _row_multiset(code.g_x, code.weights_x)
        and _row_multiset(code.g_z.permute_columns(perm), code.weights_z) == _row_multiset(code.g_z, code.weights_z)
    )


def verified_duality(code: CssCode, perm: Sequence[int] | None = None) -> tuple[int, ...] | None:
    """Return a checked weak self-duality permutation, or None."""
    candidate = perm if perm is not None else code.duality
    if candidate is None:
        return None
    return tuple(candidate) if check_weak_self_duality(code, candidate) else None


# -- file format -----------------------------------------------------------


def _fmt_weight(w: float) -> str:
    return repr(float(w))


def dumps_code(code: CssCode) -> str:
    lines = [f"{FORMAT_TAG} {FORMAT_VERSION} n={code.n} name={code.name}"]
    for tag, g, ws in (("X", code.g_x, code.weights_x), ("Z", code.g_z, code.weights_z)):
        for row, w in zip(g.rows, ws):
            line = f"{tag} {int_to_bits(row, code.n)}"
            if w != 1.0:
                line += f" weight={_fmt_weight(w)}"
            lines.append(line)
    for tag, hints in (("SX", code.stabilizer_hints_x), ("SZ", code.stabilizer_hints_z)):
        if hints is not None:
            lines.extend(f"{tag} {int_to_bits(row, code.n)}" for row in hints.rows)
    if code.duality is not None:
        lines.append("dual " + " ".join(map(str, code.duality)))
    lines.extend("sym " + " ".join(map(str, p)) for p in code.symmetries)
    return "\n".join(lines) + "\n"


def loads_code(text: str) -> CssCode:
    """Parse the line-oriented code format.

    Header ``gaugecode v1 n=<N> name=<label>``, then ``X|Z <bits> [weight=<w>]``
    generator lines.  ``SX|SZ <bits>`` lines carry optional stabilizer hints,
    ``dual <perm>`` an X/Z duality and ``sym <perm>`` lattice symmetries
    (qubit ``i`` goes to ``perm[i]``).  ``#`` starts a comment.
    """
    header = None
    n = 0
    name = "code"
    rows: dict[str, list[int]] = {"X": [], "Z": [], "SX": [], "SZ": []}
    weights: dict[str, list[float]] = {"X": [], "Z": []}
    duality = None
    syms: list[tuple[int, ...]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if fields[0] != FORMAT_TAG or len(fields) < 3:
                raise CodeFormatError("expected header 'gaugecode v1 n=<N> name=<label>'", lineno)
            if fields[1] != FORMAT_VERSION:
                raise CodeFormatError(f"unsupported format version {fields[1]!r}", lineno)
            meta = {}
            for item in fields[2:]:
                key, sep, value = item.partition("=")
                if not sep:
                    raise CodeFormatError(f"malformed header field {item!r}", lineno)
                meta[key] = value
            try:
                n = int(meta["n"])
            except (KeyError, ValueError):
                raise CodeFormatError("header needs an integer n=<N>", lineno) from None
            if n <= 0:
                raise CodeFormatError("n must be positive", lineno)
            name = meta.get("name", name)
            header = line
            continue
        tag = fields[0]
        if tag in ("dual", "sym"):
            try:
                perm = tuple(int(v) for v in fields[1:])
                _check_perm(perm, n)
            except ValueError as exc:
                raise CodeFormatError(str(exc), lineno) from None
            if tag == "dual":
                if duality is not None:
                    raise CodeFormatError("more than one dual line", lineno)
                duality = perm
            else:
                syms.append(perm)
            continue
        if tag not in rows:
            raise CodeFormatError(f"unknown type tag {tag!r}", lineno)
        if len(fields) < 2:
            raise CodeFormatError("missing bit string", lineno)
        bits = fields[1]
        if len(bits) != n:
            raise CodeFormatError(f"bit string has length {len(bits)}, expected n={n}", lineno)
        try:
            row = bits_to_int(bits)
        except ValueError as exc:
            raise CodeFormatError(str(exc), lineno) from None
        if row == 0:
            raise CodeFormatError("all-zero row", lineno)
        w = 1.0
        for extra in fields[2:]:
            key, sep, value = extra.partition("=")
            if key != "weight" or not sep or tag not in weights:
                raise CodeFormatError(f"unexpected field {extra!r}", lineno)
            try:
                w = float(value)
            except ValueError:
                raise CodeFormatError(f"bad weight {value!r}", lineno) from None
        rows[tag].append(row)
        if tag in weights:
            weights[tag].append(w)
    if header is None:
        raise CodeFormatError("empty file: missing header", 1)
    hx = BitMatrix(tuple(rows["SX"]), n) if rows["SX"] else None
    hz = BitMatrix(tuple(rows["SZ"]), n) if rows["SZ"] else None
    return CssCode(
        n, BitMatrix(tuple(rows["X"]), n), BitMatrix(tuple(rows["Z"]), n),
        weights_x=tuple(weights["X"]), weights_z=tuple(weights["Z"]), name=name,
        stabilizer_hints_x=hx, stabilizer_hints_z=hz, duality=duality, symmetries=tuple(syms),
    )


def load_code(path) -> CssCode:
    return loads_code(Path(path).read_text(encoding="utf-8"))


def save_code(code: CssCode, path) -> None:
    Path(path).write_text(dumps_code(code), encoding="utf-8")


def load_symmetries(path, n: int) -> tuple[list[tuple[int, ...]], tuple[int, ...] | None]:
    """Read a permutation file: ``sym <p0> <p1> ...`` and at most one ``dual ...`` line."""
    perms: list[tuple[int, ...]] = []
    dual = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *values = line.split()
        try:
            perm = tuple(int(v) for v in values)
            _check_perm(perm, n)
        except ValueError as exc:
            raise CodeFormatError(str(exc), lineno) from None
        if tag == "sym":
            perms.append(perm)
        elif tag == "dual":
            dual = perm
        else:
            raise CodeFormatError(f"unknown tag {tag!r}", lineno)
    return perms, dual
