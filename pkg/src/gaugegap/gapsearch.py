"""Spectral gap search over stabilizer sectors.

The ground energy sits in the unfrustrated sector (0, 0).  The first
excited level is either the second eigenvalue of that sector or the top
eigenvalue of a sector with frustrated stabilizers; mixed sectors
``(t_x, t_z)`` with both parts nonzero never beat ``(t_x, 0)``, so only the
pure ones are solved.  When the code has a verified X/Z duality the
``(0, t_z)`` sectors mirror ``(t_x, 0)`` ones and are skipped too.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .blocks import SectorLabel, build_block, combine_rows, full_hamiltonian_dense, gamma_component
from .decompose import LstrDecomposition, decompose
from .eigen import NoConvergence, SolverConfig, positivity_check, topk_symmetric
from .f2core import BitMatrix, NoSolution, int_to_bits, parity, row_reduce, solve, weight
from .gaugecode import CssCode, is_automorphism, verified_duality
from .ideals import IdealPartition, partition_ideals, sector_spectrum_via_ideals

SECOND_OF_GROUND = "second-of-ground-sector"
FRUSTRATED_GROUND = "frustrated-sector-ground"
MODES = ("single", "full")

FORMULA_NOTE = (
    "frustrated sectors contribute their top eigenvalue lambda1(H_{t,0}); "
    "the displayed closed form with lambda2 inside the minimum is not used"
)


@dataclass
class Candidate:
    sector: SectorLabel
    kind: str
    description: str
    w_frustrated: int
    value: float | None
    multiplicity: int = 1
    residual: float = 0.0
    iterations: int = 0
    failed: bool = False
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "sector": str(self.sector),
            "kind": self.kind,
            "description": self.description,
            "w_frustrated": self.w_frustrated,
            "value": self.value,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
            "iterations": self.iterations,
            "failed": self.failed,
            "error": self.error,
        }


@dataclass
class GapReport:
    n: int
    code_name: str
    mode: str
    lambda1: float
    candidates: list[Candidate]
    gap: float
    argmin: int | None  # index into candidates
    meta: dict = field(default_factory=dict)

    @property
    def argmin_candidate(self) -> Candidate | None:
        return None if self.argmin is None else self.candidates[self.argmin]

    @property
    def ok(self) -> bool:
        return not any(c.failed for c in self.candidates)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "code": self.code_name,
            "mode": self.mode,
            "lambda1": self.lambda1,
            "gap": None if np.isnan(self.gap) else self.gap,
            "argmin": self.argmin,
            "candidates": [c.to_dict() for c in self.candidates],
            "meta": self.meta,
        }

    def csv_rows(self) -> list[dict]:
        """Rows shaped like the sector tables: ground row, then one per candidate."""
        zero = SectorLabel(0, 0, *self._mz_mx())
        rows = [{"n": self.n, "sector": str(zero), "w_sZ": 0, "lambda": self.lambda1,
                 "is_argmin": False, "gap": 0.0}]
        for i, c in enumerate(self.candidates):
            if c.value is None:
                continue
            rows.append({"n": self.n, "sector": str(c.sector), "w_sZ": c.w_frustrated, "lambda": c.value,
                         "is_argmin": i == self.argmin, "gap": self.lambda1 - c.value})
        return rows

    def _mz_mx(self) -> tuple[int, int]:
        if self.candidates:
            s = self.candidates[0].sector
            return s.m_z, s.m_x
        return self.meta.get("m_z", 0), self.meta.get("m_x", 0)


CSV_COLUMNS = ("n", "sector", "w_sZ", "lambda", "is_argmin", "gap")


def format_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join([
            str(row["n"]), f'"{row["sector"]}"', str(row["w_sZ"]), f'{row["lambda"]:.6f}',
            "1" if row["is_argmin"] else "0", f'{row["gap"]:.6f}',
        ]))
    return "\n".join(lines) + "\n"


# -- sector solves ---------------------------------------------------------

@dataclass
class SectorSolve:
    values: np.ndarray
    residual: float
    iterations: int
    method: str


def solve_sector(code: CssCode, dec: LstrDecomposition, sector: SectorLabel, k: int = 1,
                 config: SolverConfig | None = None, partition: IdealPartition | None = None) -> SectorSolve:
    """Top ``k`` eigenvalues of one sector block (fewer if the block is smaller)."""
    config = config or SolverConfig()
    k = min(k, 1 << dec.r)
    if partition is not None and len(partition) > 1:
        vals = sector_spectrum_via_ideals(code, partition, sector, k=k, config=config, dec=dec)
        return SectorSolve(vals, 0.0, 0, "ideals")
    block = build_block(code, dec, sector)
    if block.nbits <= config.dense_cap:
        vals = np.linalg.eigvalsh(block.dense())[::-1][:k]
        return SectorSolve(vals, 0.0, 0, "dense")
    res = topk_symmetric(block, k=k, tol=config.tol, max_iter=config.max_iter, seed=config.seed,
                         basis_cap=config.basis_cap, check_multiplicity=k > 1,
                         memory_budget=config.memory_budget)
    return SectorSolve(res.values, float(res.residuals.max()), res.iterations, "lanczos")


def _maybe_partition(code, dec, use_ideals: bool | None) -> IdealPartition | None:
    if use_ideals is False:
        return None
    part = partition_ideals(code, dec)
    return part if len(part) > 1 else None


def ground_energy(code: CssCode, config: SolverConfig | None = None, use_ideals: bool | None = None) -> float:
    dec = decompose(code)
    part = _maybe_partition(code, dec, use_ideals)
    return float(solve_sector(code, dec, SectorLabel.zero(dec), 1, config, part).values[0])


# -- candidate sectors -----------------------------------------------------

def _coords(vec: int, basis: BitMatrix, pivots) -> int:
    """Coefficients of ``vec`` over an echelon basis (bit i for row i)."""
    c = 0
    for i, p in enumerate(pivots):
        if (vec >> p) & 1:
            c |= 1 << i
    if combine_rows(basis, c) != vec:
        raise ValueError("vector is not in the row span")
    return c


def stabilizer_generators(code: CssCode, dec: LstrDecomposition, kind: str = "z") -> list[int]:
    """Preferred stabilizer generators: builder/file hints completed by echelon rows."""
    if kind == "z":
        hints, s, piv = code.stabilizer_hints_z, dec.s_z, dec.s_z_pivots
    else:
        hints, s, piv = code.stabilizer_hints_x, dec.s_x, dec.s_x_pivots
    gens: list[int] = []
    span = BitMatrix.empty(code.n)
    for cand in list(hints.rows if hints is not None else ()) + list(s.rows):
        try:
            _coords(cand, s, piv)
        except ValueError:
            continue  # a hint that is not a stabilizer of this code
        bigger = row_reduce(span.vstack(BitMatrix((cand,), code.n)))[0]
        if bigger.nrows > span.nrows:
            gens.append(cand)
            span = bigger
    return gens


def single_frustration_sectors(code: CssCode, dec: LstrDecomposition, kind: str = "z") -> list[tuple[int, int]]:
    """One ``(coefficients, stabilizer)`` per generator, frustrating exactly that generator."""
    gens = stabilizer_generators(code, dec, kind)
    s, piv = (dec.s_z, dec.s_z_pivots) if kind == "z" else (dec.s_x, dec.s_x_pivots)
    m = s.nrows
    # syndrome of sum_j c_j T_j against a stabilizer with coordinates a is a . c
    a = BitMatrix(tuple(_coords(g, s, piv) for g in gens), m)
    out = []
    for i, g in enumerate(gens):
        rhs = BitMatrix(tuple(1 if j == i else 0 for j in range(len(gens))), 1)
        try:
            c = solve(a, rhs).rows[0]
        except NoSolution:
            row = a.rows[i]
            c = row & -row  # frustrate it together with whatever else shares that coordinate
        out.append((c, g))
    return out


def frustrated_weight(sector: SectorLabel, dec: LstrDecomposition, code: CssCode | None = None) -> int:
    """Weight of the frustrated Z stabilizer of ``sector``.

    With ``code`` the preferred generators are used: the weight of the single
    frustrated generator, or of the product when several are frustrated.
    Without it, the echelon ``S_Z`` rows paired with the set bits of ``tx``.
    """
    if sector.tx == 0:
        return 0
    if code is None:
        return weight(combine_rows(dec.s_z, sector.tx))
    t_x = combine_rows(dec.t_x, sector.tx)
    frustrated = [g for g in stabilizer_generators(code, dec, "z") if parity(g & t_x)]
    acc = 0
    for g in frustrated:
        acc ^= g
    return weight(acc)


def _frustrated_weight_x(sector: SectorLabel, dec, code) -> int:
    t_z = combine_rows(dec.t_z, sector.tz)
    acc = 0
    for g in stabilizer_generators(code, dec, "x"):
        if parity(g & t_z):
            acc ^= g
    return weight(acc)


def _permute(v: int, perm) -> int:
    out = 0
    while v:
        low = v & -v
        out |= 1 << perm[low.bit_length() - 1]
        v ^= low
    return out


def _syndrome(vec: int, rows) -> int:
    return sum(1 << i for i, s in enumerate(rows) if parity(s & vec))


def sector_orbits(coeffs: list[int], dec: LstrDecomposition, symmetries, kind: str = "z") -> dict[int, int]:
    """Map each coefficient vector to its orbit representative (smallest member)."""
    t_rows, s_rows = (dec.t_x, dec.s_z.rows) if kind == "z" else (dec.t_z, dec.s_x.rows)
    rep: dict[int, int] = {}
    for c in coeffs:
        if c in rep:
            continue
        orbit, todo = {c}, [c]
        while todo:
            cur = todo.pop()
            vec = combine_rows(t_rows, cur)
            for perm in symmetries:
                img = _syndrome(_permute(vec, perm), s_rows)
                if img not in orbit:
                    orbit.add(img)
                    todo.append(img)
        low = min(orbit)
        for o in orbit:
            rep.setdefault(o, low)
    return rep


# -- the gap ---------------------------------------------------------------

def spectral_gap(code: CssCode, mode: str = "single", symmetries=None, duality=None,
                 config: SolverConfig | None = None, threads: int = 1, use_ideals: bool | None = None,
                 progress=None) -> GapReport:
    """Gap between the top eigenvalue and the best competing level.

    ``symmetries`` (qubit permutations preserving the code) merge equivalent
    sectors; ``duality`` is a qubit permutation exchanging X and Z
    generators.  Both default to what the code carries; a permutation is
    only used after it has been checked.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    config = config or SolverConfig()
    _kernels.set_threads(threads)
    dec = decompose(code)
    part = _maybe_partition(code, dec, use_ideals)
    dual = verified_duality(code, duality if duality is not None else code.duality)
    syms = [tuple(p) for p in (symmetries if symmetries is not None else code.symmetries)]
    bad = [i for i, p in enumerate(syms) if not is_automorphism(code, p)]
    if bad:
        raise ValueError(f"symmetries {bad} do not preserve the code")

    # candidate sectors, before symmetry merging
    jobs: list[tuple[SectorLabel, str, str, int]] = []
    zero = SectorLabel.zero(dec)
    sweeps = [("z", dec.m_z)] + ([] if dual is not None else [("x", dec.m_x)])
    for kind, m in sweeps:
        if mode == "single":
            picks = [(c, f"stabilizer {kind.upper()}{i}") for i, (c, _) in
                     enumerate(single_frustration_sectors(code, dec, kind))]
        else:
            picks = [(c, "sector sweep") for c in range(1, 1 << m)]
        reps = sector_orbits([c for c, _ in picks], dec, syms, kind) if syms else {c: c for c, _ in picks}
        mult: dict[int, int] = {}
        chosen: dict[int, str] = {}
        for c, desc in picks:
            r = reps[c]
            mult[r] = mult.get(r, 0) + 1
            chosen.setdefault(r, desc)
        for r in sorted(mult):
            sec = SectorLabel(r, 0, dec.m_z, dec.m_x) if kind == "z" else SectorLabel(0, r, dec.m_z, dec.m_x)
            w = frustrated_weight(sec, dec, code) if kind == "z" else _frustrated_weight_x(sec, dec, code)
            jobs.append((sec, chosen[r], f"{kind}:{mult[r]}", w))

    # best-looking sectors first
    def predicted(sec):
        if dec.r > 24:
            return 0.0
        return build_block(code, dec, sec).diagonal_max()

    order = sorted(range(len(jobs)), key=lambda i: -predicted(jobs[i][0]))

    def run(sec, k):
        try:
            return solve_sector(code, dec, sec, k, config, part), None
        except NoConvergence as exc:
            return exc.result, exc

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        ground_future = pool.submit(run, zero, 2)
        futures = {i: pool.submit(run, jobs[i][0], 1) for i in order}
        ground, ground_err = ground_future.result()
        if ground_err is not None:
            raise ground_err  # no ground energy means no report
        results = {}
        for i in order:
            results[i] = futures[i].result()
            if progress:
                progress(f"sector {jobs[i][0]} done ({len(results)}/{len(jobs)})")

    lambda1 = float(ground.values[0])
    candidates: list[Candidate] = []
    if len(ground.values) > 1:
        candidates.append(Candidate(zero, SECOND_OF_GROUND, "second eigenvalue of the ground sector", 0,
                                    float(ground.values[1]), residual=ground.residual,
                                    iterations=ground.iterations))
    for i, (sec, desc, mult_tag, w) in enumerate(jobs):  # deterministic order, independent of completion
        res, err = results[i]
        mult = int(mult_tag.split(":")[1])
        if err is not None:
            best = float(res.values[0]) if len(res.values) else None
            candidates.append(Candidate(sec, FRUSTRATED_GROUND, desc, w, best, mult, failed=True, error=str(err)))
        else:
            candidates.append(Candidate(sec, FRUSTRATED_GROUND, desc, w, float(res.values[0]), mult,
                                        residual=res.residual, iterations=res.iterations))

    valid = [i for i, c in enumerate(candidates) if c.value is not None and not c.failed]
    if valid:
        argmin = max(valid, key=lambda i: (candidates[i].value, -i))
        gap = lambda1 - candidates[argmin].value
    else:
        argmin, gap = None, float("nan")
    meta = {
        **dec.counts(),
        "solver": config.to_dict(),
        "ideals": len(part) if part is not None else 1,
        "weakly_self_dual": dual is not None,
        "symmetries": len(syms),
        "formula_note": FORMULA_NOTE,
        "stabilizer_generators_z": [int_to_bits(g, code.n) for g in stabilizer_generators(code, dec, "z")],
        "strict_below_ground": all(c.value < lambda1 for c in candidates
                                   if c.kind == FRUSTRATED_GROUND and c.value is not None),
    }
    return GapReport(code.n, code.name, mode, lambda1, candidates, float(gap), argmin, meta)


def dense_gap(code: CssCode, cap: int = 12) -> tuple[float, float]:
    """(lambda1, gap) from the full dense spectrum, skipping the 2^k logical copies of the ground level."""
    dec = decompose(code)
    vals = np.linalg.eigvalsh(full_hamiltonian_dense(code, cap))[::-1]
    copies = 1 << dec.k
    return float(vals[0]), float(vals[0] - vals[copies]) if len(vals) > copies else float("nan")


# -- Perron-Frobenius diagnostics --------------------------------------------

def perron_diagnostics(code: CssCode, cap: int = 12, tol: float = 1e-9, positivity_tol: float = 0.0,
                       sample_tz: int | None = None, seed: int = 0) -> dict:
    """Dense checks of the sign and ordering properties on a small code.

    (a) each component ground vector is positive; (b) the unfrustrated
    sector strictly wins; (c) ground states are stabilized; (d) a
    ``(t_x, 0)`` sector dominates every ``(t_x, t_z)``.
    """
    dec = decompose(code)
    if dec.m_x + dec.r > cap:
        raise ValueError(f"component size m_x + r = {dec.m_x + dec.r} exceeds cap {cap}")
    report: dict = {"counts": dec.counts(), "checks": {}, "details": {}}
    checks, details = report["checks"], report["details"]

    # (a)
    kinds = {}
    for tx in range(1 << dec.m_z):
        m = gamma_component(code, dec, tx, cap=cap).dense(cap)
        _, vecs = np.linalg.eigh(m)
        kinds[int_to_bits(tx, dec.m_z) or "-"] = positivity_check(vecs[:, -1], positivity_tol)
    checks["component_ground_positive"] = all(v == "positive" for v in kinds.values())
    details["component_ground_positive"] = kinds

    # (b) and (d)
    rng = np.random.default_rng(seed)
    tops: dict[SectorLabel, float] = {}
    tz_list = list(range(1 << dec.m_x))
    if sample_tz is not None and len(tz_list) > sample_tz + 1:
        tz_list = [0] + sorted(rng.choice(np.arange(1, len(tz_list)), sample_tz, replace=False).tolist())
    for tx in range(1 << dec.m_z):
        for tz in tz_list:
            sec = SectorLabel(tx, tz, dec.m_z, dec.m_x)
            tops[sec] = float(np.linalg.eigvalsh(build_block(code, dec, sec).dense(cap))[-1])
    zero = SectorLabel.zero(dec)
    others = [v for s, v in tops.items() if s != zero]
    margin = tops[zero] - max(others) if others else float("inf")
    checks["ground_sector_strict"] = margin > tol
    details["ground_sector_strict"] = {"lambda1": tops[zero], "margin": margin}
    worst = float("inf")
    for sec, v in tops.items():
        if sec.tz:
            worst = min(worst, tops[SectorLabel(sec.tx, 0, dec.m_z, dec.m_x)] - v)
    checks["tx0_dominates"] = worst >= -tol
    details["tx0_dominates"] = {"min_margin": worst if worst != float("inf") else None}

    # (c)
    if code.n <= cap:
        h = full_hamiltonian_dense(code, cap)
        vals, vecs = np.linalg.eigh(h)
        ground = vecs[:, vals >= vals[-1] - 1e-8]
        idx = np.arange(1 << code.n)
        defect = 0.0
        for s in dec.s_x.rows:
            defect = max(defect, float(np.abs(ground[idx ^ s] - ground).max()))
        for s in dec.s_z.rows:
            signs = 1 - 2 * (np.bitwise_count(idx & s) & 1).astype(np.float64)
            defect = max(defect, float(np.abs(signs[:, None] * ground - ground).max()))
        checks["ground_stabilized"] = defect <= 1e-8
        details["ground_stabilized"] = {"max_defect": defect, "ground_dim": int(ground.shape[1])}
    else:
        details["ground_stabilized"] = {"skipped": f"n = {code.n} above cap {cap}"}
    report["ok"] = all(checks.values())
    return report
