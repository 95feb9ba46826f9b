"""Symmetric eigensolvers: thick-restart Lanczos plus a dense oracle.

The Lanczos solver keeps at most ``basis_cap`` vectors, reorthogonalizes
every new vector against the whole basis (two Gram-Schmidt passes) and
restarts by keeping the leading Ritz vectors.  Residual estimates are
confirmed with explicit matvecs before a result is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

DENSE_SPECTRUM_CAP = 4096
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 5000
DEFAULT_BASIS_CAP = 64
DEFAULT_MEMORY_BUDGET = 3 << 30


@dataclass
class EigenResult:
    values: np.ndarray  # descending
    residuals: np.ndarray
    iterations: int
    vectors: np.ndarray | None = None  # rows are eigenvectors
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "residuals": [float(r) for r in self.residuals],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


class NoConvergence(RuntimeError):
    def __init__(self, message: str, result: EigenResult):
        super().__init__(message)
        self.result = result


class ProblemTooLarge(ValueError):
    """The smallest usable Lanczos basis does not fit in the memory budget."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0
    basis_cap: int = DEFAULT_BASIS_CAP
    memory_budget: int = DEFAULT_MEMORY_BUDGET
    dense_cap: int = 12  # operators with at most 2**dense_cap rows go to dense eigh when exact spectra are needed

    def to_dict(self) -> dict:
        return {"tol": self.tol, "max_iter": self.max_iter, "seed": self.seed, "basis_cap": self.basis_cap}


def _as_matvec(op) -> tuple[Callable[[np.ndarray], np.ndarray], int]:
    if isinstance(op, np.ndarray):
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {op.shape}")
        return (lambda x: op @ x), op.shape[0]
    if hasattr(op, "apply") and hasattr(op, "dim"):
        return op.apply, int(op.dim)
    if hasattr(op, "matvec") and hasattr(op, "shape"):
        return op.matvec, int(op.shape[0])
    if hasattr(op, "shape") and hasattr(op, "__matmul__"):  # scipy sparse
        return (lambda x: op @ x), int(op.shape[0])
    raise TypeError(f"cannot use {type(op).__name__} as a linear operator")


def _dense_from_matvec(matvec, dim: int) -> np.ndarray:
    m = np.empty((dim, dim))
    e = np.zeros(dim)
    for j in range(dim):
        e[j] = 1.0
        m[:, j] = matvec(e)
        e[j] = 0.0
    return 0.5 * (m + m.T)


def dense_spectrum(m: np.ndarray, cap: int = DENSE_SPECTRUM_CAP) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, ascending."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape[0] > cap:
        raise ValueError(f"dense spectrum limited to dimension {cap}, got {m.shape[0]}")
    return np.linalg.eigvalsh(m)


def dense_topk(op, k: int) -> EigenResult:
    matvec, dim = _as_matvec(op)
    m = np.asarray(op, dtype=np.float64) if isinstance(op, np.ndarray) else _dense_from_matvec(matvec, dim)
    vals, vecs = np.linalg.eigh(m)
    vals = vals[::-1][:k]
    vecs = vecs[:, ::-1][:, :k].T.copy()
    res = np.array([np.linalg.norm(m @ v - lam * v) for lam, v in zip(vals, vecs)])
    return EigenResult(vals, res, iterations=dim, vectors=vecs, meta={"method": "dense"})


def _start_vector(dim: int, seed: int) -> np.ndarray:
    # PCG64 standard normals, plus the all-ones direction which overlaps the
    # Perron vector of stoquastic sectors
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    v += 1.0 / np.sqrt(dim)
    return v / np.linalg.norm(v)


def _orthogonalize(w: np.ndarray, basis: np.ndarray) -> np.ndarray:
    h = basis @ w
    w -= basis.T @ h
    h2 = basis @ w
    w -= basis.T @ h2
    return h + h2


def _lanczos(matvec, dim, k, tol, max_iter, seed, basis_cap, locked=None):
    """Thick-restart Lanczos for the top ``k`` pairs; returns (values, vectors, residuals, matvecs, ok)."""
    m = max(min(basis_cap, dim), k + 2)
    rng = np.random.default_rng(seed + 7919)
    V = np.empty((m + 1, dim))
    T = np.zeros((m, m))
    V[0] = _start_vector(dim, seed)
    if locked is not None:
        _orthogonalize(V[0], locked)
        V[0] /= np.linalg.norm(V[0])
    j = 0
    matvecs = 0
    scale = 1.0
    nkeep_base = min(max(2 * k, k + 8), m // 2) if m >= 2 * k + 4 else k
    best = None
    while True:
        beta = 0.0
        for i in range(j, m):
            w = matvec(V[i])
            matvecs += 1
            if locked is not None:
                _orthogonalize(w, locked)
            h = _orthogonalize(w, V[: i + 1])
            T[i, i] = h[i]
            scale = max(scale, abs(h[i]))
            beta = np.linalg.norm(w)
            if beta <= 1e-12 * scale:
                # invariant subspace: continue with a fresh orthogonal direction
                beta = 0.0
                w = rng.standard_normal(dim)
                if locked is not None:
                    _orthogonalize(w, locked)
                _orthogonalize(w, V[: i + 1])
                nrm = np.linalg.norm(w)
                if nrm <= 1e-10:
                    m_eff = i + 1
                    theta, Y = np.linalg.eigh(T[:m_eff, :m_eff])
                    order = np.argsort(theta)[::-1][:k]
                    X = Y[:, order].T @ V[:m_eff]
                    return theta[order], X, np.zeros(len(order)), matvecs, True
                V[i + 1] = w / nrm
            else:
                V[i + 1] = w / beta
            if i + 1 < m:
                T[i, i + 1] = T[i + 1, i] = beta
        theta, Y = np.linalg.eigh(T)
        order = np.argsort(theta)[::-1]
        theta, Y = theta[order], Y[:, order]
        est = np.abs(beta * Y[m - 1, :])
        thresholds = tol * np.maximum(1.0, np.abs(theta[:k]))
        if np.all(est[:k] <= thresholds):
            X = Y[:, :k].T @ V[:m]
            norms = np.linalg.norm(X, axis=1, keepdims=True)
            X /= norms
            res = np.array([np.linalg.norm(matvec(x) - lam * x) for lam, x in zip(theta[:k], X)])
            matvecs += k
            best = (theta[:k].copy(), X, res)
            if np.all(res <= thresholds):
                return theta[:k].copy(), X, res, matvecs, True
        if matvecs >= max_iter:
            if best is None:
                X = Y[:, :k].T @ V[:m]
                X /= np.linalg.norm(X, axis=1, keepdims=True)
                best = (theta[:k].copy(), X, est[:k].copy())
            return (*best, matvecs, False)
        # thick restart: keep the leading Ritz vectors plus the residual direction
        nkeep = nkeep_base
        kept = Y[:, :nkeep].T @ V[:m]
        V[:nkeep] = kept
        V[nkeep] = V[m]
        T[:] = 0.0
        T[np.arange(nkeep), np.arange(nkeep)] = theta[:nkeep]
        T[nkeep, :nkeep] = T[:nkeep, nkeep] = beta * Y[m - 1, :nkeep]
        j = nkeep


def topk_symmetric(op, k: int = 1, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                   seed: int = 0, basis_cap: int = DEFAULT_BASIS_CAP, return_vectors: bool = False,
                   check_multiplicity: bool = False, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> EigenResult:
    """Largest ``k`` eigenpairs of a symmetric operator.

    ``op`` may be a dense array, a scipy sparse matrix or anything with
    ``apply``/``dim``.  With ``check_multiplicity`` the converged vectors are
    locked and a deflated run searches for missed copies of degenerate
    eigenvalues until none is found.

    Raises
    ------
    NoConvergence
        When ``max_iter`` matvecs pass without meeting ``tol``; the best
        values and residuals so far travel on the exception.
    ProblemTooLarge
        When even a minimal basis exceeds ``memory_budget`` bytes.
    """
    matvec, dim = _as_matvec(op)
    if k < 1 or k > dim:
        raise ValueError(f"need 1 <= k <= dim, got k={k}, dim={dim}")
    if dim <= basis_cap:
        res = dense_topk(op, k)
        if not return_vectors:
            res.vectors = None
        return res

    # the basis is the binding memory cost for large blocks
    cap = min(basis_cap, max(2 * k + 8, memory_budget // (8 * dim) // 2))
    need = 8 * dim * (cap + 1)
    if need > memory_budget:
        raise ProblemTooLarge(
            f"a {cap}-vector basis of dimension {dim} needs {need / 2**30:.1f} GiB, "
            f"budget is {memory_budget / 2**30:.1f} GiB"
        )
    vals, vecs, res, matvecs, ok = _lanczos(matvec, dim, k, tol, max_iter, seed, cap)
    rounds = 0
    while ok and check_multiplicity and len(vals) < dim:
        # search the orthogonal complement of the converged vectors for a
        # value that belongs in the top k (a missed degenerate copy)
        rounds += 1
        extra_vals, extra_vecs, _, mv, ok_extra = _lanczos(
            matvec, dim, 1, tol, max_iter, seed + 1000 * rounds, cap, locked=vecs
        )
        matvecs += mv
        if not ok_extra or extra_vals[0] <= vals[-1] + tol * max(1.0, abs(vals[-1])):
            break
        allv = np.concatenate([vals, extra_vals])
        allx = np.vstack([vecs, extra_vecs])
        order = np.argsort(allv, kind="stable")[::-1][:k]
        vals, vecs = allv[order], allx[order]
        res = np.array([np.linalg.norm(matvec(x) - lam * x) for lam, x in zip(vals, vecs)])
        matvecs += k
    result = EigenResult(vals, res, matvecs, vecs if return_vectors else None, converged=ok,
                         meta={"method": "lanczos", "basis_cap": cap, "multiplicity_rounds": rounds})
    if not ok:
        raise NoConvergence(f"Lanczos did not converge in {matvecs} matvecs", result)
    return result


def positivity_check(v: np.ndarray, tol: float = 0.0) -> str:
    """Classify a real vector as 'positive', 'mixed' or 'nonnegative' after a global sign fix."""
    v = np.asarray(v, dtype=np.float64)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    if np.all(v > tol):
        return "positive"
    if np.any(v < -tol):
        return "mixed"
    return "nonnegative"
