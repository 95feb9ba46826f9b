"""Commuting ideals: split the gauge generators into mutually commuting parts.

Parts are the connected components of the anticommutation graph on the
generator rows.  Each part is decomposed on its own (same ``n``, subset of
rows), so a sector block of the full code is a sum of commuting per-ideal
blocks acting on separate tensor factors, and its spectrum is the sumset of
the per-ideal spectra.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .blocks import SectorLabel, build_block, sector_vectors
from .decompose import LstrDecomposition, decompose
from .eigen import NoConvergence, SolverConfig, topk_symmetric
from .f2core import BitMatrix, parity
from .gaugecode import CssCode


class IdealError(RuntimeError):
    pass


@dataclass(frozen=True)
class IdealPartition:
    code: CssCode
    parts: tuple[tuple[int, ...], ...]  # generator indices: X rows first, then Z rows offset by |G_X|
    per_ideal_codes: tuple[CssCode, ...]
    per_ideal_decs: tuple[LstrDecomposition, ...]

    def __len__(self) -> int:
        return len(self.parts)

    def summary(self) -> list[dict]:
        return [
            {"size": len(p), **{k: v for k, v in d.counts().items() if k != "n"}}
            for p, d in zip(self.parts, self.per_ideal_decs)
        ]


def anticommutation_edges(code: CssCode) -> list[tuple[int, int]]:
    nx = code.g_x.nrows
    return [
        (a, nx + b)
        for a, gx in enumerate(code.g_x.rows)
        for b, gz in enumerate(code.g_z.rows)
        if parity(gx & gz)
    ]


def partition_ideals(code: CssCode, dec: LstrDecomposition | None = None) -> IdealPartition:
    """Finest partition of the generators into mutually commuting parts."""
    nx, nz = code.g_x.nrows, code.g_z.nrows
    total = nx + nz
    edges = anticommutation_edges(code)
    if edges:
        i, j = np.array(edges).T
        graph = coo_matrix((np.ones(len(edges)), (i, j)), shape=(total, total))
    else:
        graph = coo_matrix((total, total))
    _, labels = connected_components(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(idx)
    parts = tuple(sorted((tuple(g) for g in groups.values()), key=lambda p: p[0]))

    # cross-part commutation, exhaustively
    owner = {idx: a for a, p in enumerate(parts) for idx in p}
    for a, b in edges:
        if owner[a] != owner[b]:
            raise IdealError(f"generators {a} and {b} anticommute across parts")

    codes, decs = [], []
    for a, part in enumerate(parts):
        xs = [i for i in part if i < nx]
        zs = [i - nx for i in part if i >= nx]
        sub = CssCode(
            code.n,
            BitMatrix(tuple(code.g_x.rows[i] for i in xs), code.n),
            BitMatrix(tuple(code.g_z.rows[i] for i in zs), code.n),
            weights_x=tuple(code.weights_x[i] for i in xs),
            weights_z=tuple(code.weights_z[i] for i in zs),
            name=f"{code.name}/ideal{a}",
        )
        codes.append(sub)
        decs.append(decompose(sub))
    dec = dec if dec is not None else decompose(code)
    r_sum = sum(d.r for d in decs)
    if r_sum != dec.r:
        raise IdealError(f"per-ideal r values sum to {r_sum}, full code has r = {dec.r}")
    return IdealPartition(code, parts, tuple(codes), tuple(decs))


def sector_for_ideal(sector: SectorLabel, dec: LstrDecomposition, part: int,
                     partition: IdealPartition) -> SectorLabel:
    """Map a sector of the full code to the matching sector of one ideal.

    The syndrome of the full ``t_X`` against the ideal's Z stabilizers gives
    the ideal's ``t_X`` coefficients (because ``S_Z T_X^T = I``), and
    symmetrically for ``t_Z``.
    """
    sub = partition.per_ideal_decs[part]
    t_x, t_z = sector_vectors(dec, sector)
    tx = sum(1 << i for i, s in enumerate(sub.s_z.rows) if parity(s & t_x))
    tz = sum(1 << i for i, s in enumerate(sub.s_x.rows) if parity(s & t_z))
    return SectorLabel(tx, tz, sub.m_z, sub.m_x)


def _ideal_values(code, dec, sector, count, config: SolverConfig) -> np.ndarray:
    block = build_block(code, dec, sector)
    if block.nbits <= config.dense_cap:
        vals = np.linalg.eigvalsh(block.dense())[::-1]
        return vals[:count]
    res = topk_symmetric(block, k=min(count, block.dim), tol=config.tol, max_iter=config.max_iter,
                         seed=config.seed, basis_cap=config.basis_cap, check_multiplicity=True,
                         memory_budget=config.memory_budget)
    return res.values


def topk_sumset(lists: list[np.ndarray], k: int) -> np.ndarray:
    """Largest ``k`` sums choosing one entry from each descending list."""
    if any(len(l) == 0 for l in lists):
        return np.array([])
    start = tuple(0 for _ in lists)
    heap = [(-sum(l[0] for l in lists), start)]
    seen = {start}
    out = []
    while heap and len(out) < k:
        neg, idx = heapq.heappop(heap)
        out.append(-neg)
        for a in range(len(lists)):
            if idx[a] + 1 < len(lists[a]):
                nxt = idx[:a] + (idx[a] + 1,) + idx[a + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    value = sum(l[i] for l, i in zip(lists, nxt))  # direct sum, no drift
                    heapq.heappush(heap, (-value, nxt))
    return np.array(out)


def sector_spectrum_via_ideals(code: CssCode, partition: IdealPartition, sector: SectorLabel | None = None,
                               k: int = 2, config: SolverConfig | None = None,
                               dec: LstrDecomposition | None = None, threads: int = 1) -> np.ndarray:
    """Top ``k`` eigenvalues of a sector block, combined from per-ideal spectra.

    Each ideal starts with ``k + 2`` eigenvalues; an ideal is deepened when a
    value beyond its truncation could still reach the global top ``k``.
    """
    config = config or SolverConfig()
    dec = dec if dec is not None else decompose(code)
    sector = SectorLabel.zero(dec) if sector is None else sector
    n_parts = len(partition)
    subsectors = [sector_for_ideal(sector, dec, a, partition) for a in range(n_parts)]
    dims = [1 << d.r for d in partition.per_ideal_decs]
    counts = [min(k + 2, dims[a]) for a in range(n_parts)]

    def solve(a):
        try:
            return _ideal_values(partition.per_ideal_codes[a], partition.per_ideal_decs[a],
                                 subsectors[a], counts[a], config)
        except NoConvergence as exc:
            raise NoConvergence(f"ideal {a}: {exc}", exc.result) from None

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        lists = list(pool.map(solve, range(n_parts)))
    while True:
        top = topk_sumset(lists, k)
        kth = top[-1] if len(top) == k else -np.inf
        tops = sum(l[0] for l in lists)
        deepen = []
        for a, l in enumerate(lists):
            if len(l) >= dims[a]:
                continue
            bound = tops - l[0] + l[-1]
            if bound >= kth - config.tol * max(1.0, abs(kth)):
                deepen.append(a)
        if not deepen:
            return top
        for a in deepen:
            counts[a] = min(2 * counts[a], dims[a])
            lists[a] = solve(a)
