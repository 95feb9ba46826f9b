"""Numba kernels for the matrix-free block action.

Each output entry is computed from reads only, so the parallel loop gives
bitwise identical results for any thread count.
"""

from __future__ import annotations

import numba
import numpy as np

# omp first: threadsafe for concurrent sector solves, and avoids the old-TBB warning
numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


@numba.njit(parallel=True, cache=True)
def apply_with_diag(x, diag, shifts, coeffs, out):
    n = x.shape[0]
    nt = shifts.shape[0]
    for i in numba.prange(n):
        acc = diag[i] * x[i]
        for t in range(nt):
            acc += coeffs[t] * x[i ^ shifts[t]]
        out[i] = acc


@numba.njit(inline="always")
def _parity(v):
    p = 0
    while v:
        v &= v - 1
        p ^= 1
    return p


@numba.njit(parallel=True, cache=True)
def apply_streaming(x, masks, zcoeffs, shifts, coeffs, out):
    n = x.shape[0]
    nt = shifts.shape[0]
    nz = masks.shape[0]
    for i in numba.prange(n):
        d = 0.0
        for z in range(nz):
            if _parity(i & masks[z]):
                d -= zcoeffs[z]
            else:
                d += zcoeffs[z]
        acc = d * x[i]
        for t in range(nt):
            acc += coeffs[t] * x[i ^ shifts[t]]
        out[i] = acc


def set_threads(threads: int | None) -> None:
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))


def warmup() -> None:
    x = np.zeros(2)
    out = np.empty(2)
    shifts = np.zeros(1, dtype=np.int64)
    apply_with_diag(x, x, shifts, np.zeros(1), out)
    apply_streaming(x, shifts, np.zeros(1), shifts, np.zeros(1), out)
