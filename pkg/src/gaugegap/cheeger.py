"""Cuts, variational gap witnesses and the bi-partition bound nu(H).

For a real symmetric ``H`` with nonnegative off-diagonal entries,

    nu(H) = max over bi-partitions (A, B) of min(lambda1(H_AA), lambda1(H_BB))

satisfies ``lambda2 <= nu <= lambda1``.  The right inequality is eigenvalue
interlacing for principal submatrices; the left one holds because the
Perron vectors of ``H_AA`` and ``H_BB``, padded with zeros, span a
two-dimensional space on which the Rayleigh quotient is at least the
smaller of the two.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blocks import SectorLabel, build_block, gamma_component
from .decompose import decompose
from .eigen import _as_matvec
from .f2core import BitMatrix, NoSolution, solve
from .gapsearch import spectral_gap
from .gaugecode import CssCode

ZERO_TOL = 1e-12
EXHAUSTIVE_CAP = 16
MOVES_PER_DIM = 50


@dataclass
class CutBound:
    partition: np.ndarray  # bool mask, True = side A
    rayleigh_value: float | None = None
    nu_value: float | None = None
    bound_kind: str = "variational"  # or "nu-sandwich"
    degenerate: bool = False
    heuristic: bool = False
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "partition": "".join("1" if b else "0" for b in self.partition),
            "rayleigh_value": self.rayleigh_value,
            "nu_value": self.nu_value,
            "bound_kind": self.bound_kind,
            "degenerate": self.degenerate,
            "heuristic": self.heuristic,
            "meta": self.meta,
        }


def double_well(d: int) -> np.ndarray:
    """Path graph adjacency plus a potential of 2 on both end sites."""
    if d < 3:
        raise ValueError(f"double well needs d >= 3, got {d}")
    h = np.zeros((d, d))
    i = np.arange(d - 1)
    h[i, i + 1] = h[i + 1, i] = 1.0
    h[0, 0] = h[-1, -1] = 2.0
    return h


def random_stoquastic(dim: int, seed: int = 0, density: float = 0.5) -> np.ndarray:
    """Random symmetric matrix with nonnegative off-diagonal entries."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((dim, dim)) * (rng.random((dim, dim)) < density), 1)
    return upper + upper.T + np.diag(rng.normal(size=dim))


def sign_cut(v2: np.ndarray, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Side A holds the entries where ``v2`` is nonnegative (tiny entries count as zero)."""
    v2 = np.asarray(v2, dtype=np.float64)
    return (v2 >= 0) | (np.abs(v2) < zero_tol)


def count_zero_entries(v2: np.ndarray, zero_tol: float = ZERO_TOL) -> int:
    return int(np.count_nonzero(np.abs(np.asarray(v2)) < zero_tol))


def variational_gap_bound(h, v1: np.ndarray, partition: np.ndarray) -> CutBound:
    """Rayleigh quotient of the cut vector ``v_A (+) -v_B`` after projecting out ``v1``.

    The result is a lower bound on ``lambda2``; ``lambda1 - rayleigh`` is
    therefore an upper estimate of the gap.
    """
    matvec, dim = _as_matvec(h)
    v1 = np.asarray(v1, dtype=np.float64)
    v1 = v1 / np.linalg.norm(v1)
    mask = np.asarray(partition, dtype=bool)
    if mask.shape != (dim,):
        raise ValueError(f"partition must have length {dim}")
    u = np.where(mask, v1, -v1)
    u -= (v1 @ u) * v1
    nrm = np.linalg.norm(u)
    if nrm < 1e-10:
        return CutBound(mask, None, None, "variational", degenerate=True,
                        meta={"reason": "cut vector is parallel to the ground vector"})
    u /= nrm
    lam1 = float(v1 @ matvec(v1))
    ray = float(u @ matvec(u))
    return CutBound(mask, ray, None, "variational",
                    meta={"lambda1": lam1, "gap_upper_estimate": lam1 - ray, "side_a": int(mask.sum())})


def _top(h: np.ndarray, idx: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(h[np.ix_(idx, idx)])[-1])


def _split_value(h: np.ndarray, mask: np.ndarray) -> float:
    a = np.flatnonzero(mask)
    b = np.flatnonzero(~mask)
    if len(a) == 0 or len(b) == 0:
        return -np.inf
    return min(_top(h, a), _top(h, b))


def _exhaustive_chunk(h, codes):
    d = h.shape[0]
    best, best_code = -np.inf, None
    bits = 1 << np.arange(d - 1)
    for code in codes:
        mask = np.zeros(d, dtype=bool)
        mask[:-1] = (code & bits) != 0  # the last index always sits on side B
        val = _split_value(h, mask)
        if val > best:
            best, best_code = val, code
    return best, best_code


def nu_bound(h: np.ndarray, strategy: str = "exhaustive", workers: int = 1,
             move_budget: int | None = None) -> CutBound:
    """Bi-partition bound ``nu(H)``.

    ``exhaustive`` enumerates every proper bi-partition (dimension at most
    16).  ``sign-cut-local-search`` starts from the sign cut of the second
    eigenvector and applies improving single-element moves; its value is a
    lower bound on ``nu`` and is flagged heuristic.
    """
    h = np.asarray(h, dtype=np.float64)
    d = h.shape[0]
    if d < 2:
        raise ValueError("need dimension >= 2 for a bi-partition")
    if strategy == "exhaustive":
        if d > EXHAUSTIVE_CAP:
            raise ValueError(f"exhaustive search limited to dimension {EXHAUSTIVE_CAP}, got {d}")
        codes = np.arange(1, 1 << (d - 1))  # side A nonempty; side B holds the last index
        chunks = np.array_split(codes, max(1, workers))
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            results = list(pool.map(lambda c: _exhaustive_chunk(h, c), chunks))
        best, code = max((r for r in results if r[1] is not None), key=lambda r: (r[0], -r[1]))
        mask = np.zeros(d, dtype=bool)
        mask[:-1] = (int(code) >> np.arange(d - 1)) & 1 == 1
        return CutBound(mask, None, float(best), "nu-sandwich", meta={"partitions": len(codes)})
    if strategy == "sign-cut-local-search":
        vals, vecs = np.linalg.eigh(h)
        mask = sign_cut(vecs[:, -2])
        if mask.all() or not mask.any():
            mask = np.zeros(d, dtype=bool)
            mask[: d // 2] = True
        best = _split_value(h, mask)
        budget = move_budget if move_budget is not None else MOVES_PER_DIM * d
        moves = 0
        improved = True
        while improved and moves < budget:
            improved = False
            for i in range(d):
                if moves >= budget:
                    break
                mask[i] = ~mask[i]
                moves += 1
                val = _split_value(h, mask)
                if val > best + 1e-14:
                    best, improved = val, True
                else:
                    mask[i] = ~mask[i]
        return CutBound(mask, None, float(best), "nu-sandwich", heuristic=True,
                        meta={"moves": moves, "lambda1": float(vals[-1]), "lambda2": float(vals[-2])})
    raise ValueError(f"unknown strategy {strategy!r}")


def sector_cut(code: CssCode, sector: SectorLabel | None = None, cap: int = 12) -> dict:
    """Sign cut of the second eigenvector of one small sector block, with both bounds."""
    dec = decompose(code)
    sector = SectorLabel.zero(dec) if sector is None else sector
    h = build_block(code, dec, sector).dense(cap)
    vals, vecs = np.linalg.eigh(h)
    out = {"sector": str(sector), "lambda1": float(vals[-1]),
           "lambda2": float(vals[-2]) if len(vals) > 1 else None}
    if len(vals) < 2:
        out["variational"] = None
        return out
    mask = sign_cut(vecs[:, -2])
    out["zero_entries"] = count_zero_entries(vecs[:, -2])
    out["variational"] = variational_gap_bound(h, vecs[:, -1], mask).to_dict()
    if h.shape[0] <= EXHAUSTIVE_CAP:
        out["nu"] = nu_bound(h).to_dict()
    else:
        out["nu"] = nu_bound(h, "sign-cut-local-search").to_dict()
    return out


def cut_crossings(code: CssCode, tx: int = 0, cap: int = 12) -> dict:
    """How often the sign cut of a component's second eigenvector is crossed.

    For each X stabilizer row ``s`` (written as a product of X generators)
    and each basis state ``v``, walk from ``v`` to ``s v`` one generator at a
    time and count sign changes of the second eigenvector.  Reports the
    number of (state, stabilizer) walks with odd and even crossing counts.
    """
    dec = decompose(code)
    comp = gamma_component(code, dec, tx, cap=cap)
    h = comp.dense(cap)
    vals, vecs = np.linalg.eigh(h)
    side = sign_cut(vecs[:, -2])
    shifts = [t[0] for t in comp.translations]
    idx = np.arange(comp.dim)
    counts = {"odd": 0, "even": 0}
    per_stabilizer = []
    for s in dec.s_x.rows:
        col = BitMatrix(tuple((s >> q) & 1 for q in range(code.n)), 1)
        try:
            coeffs = solve(code.g_x.T, col).rows[0]
        except NoSolution:
            continue
        path = [shifts[j] for j in range(code.g_x.nrows) if (coeffs >> j) & 1]
        cur = idx.copy()
        crossings = np.zeros(comp.dim, dtype=np.int64)
        for sh in path:
            nxt = cur ^ sh
            crossings += side[cur] != side[nxt]
            cur = nxt
        odd = int(np.count_nonzero(crossings & 1))
        per_stabilizer.append({"odd": odd, "even": comp.dim - odd})
        counts["odd"] += odd
        counts["even"] += comp.dim - odd
    return {"component": comp.label, "dim": comp.dim, "lambda1": float(vals[-1]),
            "lambda2": float(vals[-2]), "crossings": counts, "per_stabilizer": per_stabilizer}


def protofact_check(code: CssCode, cap: int = 12, tol: float = 1e-8) -> dict:
    """Compare lambda2 of the full Hamiltonian with the extreme frustrated-sector tops.

    Reports agreement for both the minimum and the maximum over ``t_x != 0``
    of ``lambda1(H_{t_x,0})``; asserts nothing.
    """
    dec = decompose(code)
    if dec.r > cap:
        raise ValueError(f"r = {dec.r} above cap {cap}")
    tops = []
    for tx in range(1, 1 << dec.m_z):
        h = build_block(code, dec, SectorLabel(tx, 0, dec.m_z, dec.m_x)).dense(cap)
        tops.append(float(np.linalg.eigvalsh(h)[-1]))
    report = spectral_gap(code, mode="full")
    lam2 = report.lambda1 - report.gap if report.argmin is not None else None
    out = {"lambda1": report.lambda1, "lambda2": lam2,
           "min_frustrated_top": min(tops) if tops else None,
           "max_frustrated_top": max(tops) if tops else None}
    for key in ("min_frustrated_top", "max_frustrated_top"):
        out[key.replace("_top", "_agrees")] = (
            None if out[key] is None or lam2 is None else abs(out[key] - lam2) <= tol
        )
    return out


def all_bipartitions(d: int):
    """Proper bi-partitions as bool masks, each unordered pair once."""
    for code in range(1, 1 << (d - 1)):
        yield np.array([(code >> i) & 1 == 1 for i in range(d - 1)] + [False])


__all__ = [
    "CutBound", "double_well", "random_stoquastic", "sign_cut", "count_zero_entries",
    "variational_gap_bound", "nu_bound", "sector_cut", "cut_crossings", "protofact_check",
    "all_bipartitions",
]
