"""Competitor multi-graph embeddings: Omnibus, MASE and unfolded SVD (USE).

All three reduce to the adjacency spectral embedding for a single graph.
Dense decompositions are used up to a small matrix side and an implicitly
restarted Lanczos / sparse SVD (deterministic start vector) beyond that,
behind the same interface. Singular-vector signs are fixed so the largest
magnitude coordinate of each vector is positive, making embeddings
reproducible across platforms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .classify import EvalProtocol, cross_validate_embedding
from .graph import DenseGraph, EdgeList, GraphCollection, LabelVector

# matrices at most this wide use exact dense decompositions
DENSE_LIMIT = 600

_RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralConfig:
    """Baseline choice and the dimension sweep bound."""

    method: str
    d_max: int = 30

    def __post_init__(self):
        if self.method not in ("omnibus", "mase", "use"):
            raise ValueError(f"unknown spectral method: {self.method!r}")
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")


def _to_csr(graph) -> sp.csr_matrix:
    if isinstance(graph, DenseGraph):
        return sp.csr_matrix(graph.matrix)
    e: EdgeList = graph
    if e.directed:
        rows, cols, data = e.u, e.v, e.w
    else:
        off = e.u != e.v
        rows = np.concatenate([e.u, e.v[off]])
        cols = np.concatenate([e.v, e.u[off]])
        data = np.concatenate([e.w, e.w[off]])
    return sp.csr_matrix((data, (rows, cols)), shape=(e.n, e.n))


def _fix_signs(U: np.ndarray, V: np.ndarray | None = None):
    """Flip columns so each vector's largest-magnitude coordinate is positive."""
    flips = np.sign(U[np.abs(U).argmax(axis=0), np.arange(U.shape[1])])
    flips[flips == 0] = 1.0
    U = U * flips
    if V is None:
        return U
    return U, V * flips


def _truncate_rank(vals: np.ndarray, d: int, what: str) -> int:
    """Numerical rank cutoff; warns when fewer than d directions exist."""
    cutoff = np.abs(vals).max(initial=0.0) * _RANK_RTOL
    avail = int((np.abs(vals) > cutoff).sum())
    if avail < d:
        warnings.warn(f"{what}: requested d={d} exceeds numerical rank {avail}; truncating")
        return avail
    return d


def top_eigenpairs(A, d: int):
    """Top-d eigenpairs of a symmetric matrix/operator by eigenvalue magnitude.

    Returns (vals, vecs) sorted by |val| descending, signs fixed; truncates
    with a warning when d exceeds the numerical rank.
    """
    n = A.shape[0]
    if d < 1 or d > n:
        raise ValueError(f"d must be in 1..{n}")
    dense = isinstance(A, np.ndarray) or (sp.issparse(A) and n <= DENSE_LIMIT)
    if dense or d >= n - 1:
        M = A.toarray() if sp.issparse(A) else np.asarray(A)
        if not isinstance(M, np.ndarray):  # LinearOperator fallback
            M = A @ np.eye(n)
        vals, vecs = np.linalg.eigh(M)
    else:
        v0 = np.full(n, 1.0 / np.sqrt(n))
        vals, vecs = spla.eigsh(A, k=d, which="LM", v0=v0)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    d = _truncate_rank(vals, d, "eigendecomposition")
    return vals[:d], _fix_signs(vecs[:, :d])


def truncated_svd(X, d: int):
    """Leading-d singular triplet of a (possibly sparse) matrix.

    Returns (U, s, V) with s descending and signs fixed via U.
    """
    n, m = X.shape
    if d < 1 or d > min(n, m):
        raise ValueError(f"d must be in 1..{min(n, m)}")
    if (not sp.issparse(X)) or min(n, m) <= DENSE_LIMIT or d >= min(n, m) - 1:
        M = X.toarray() if sp.issparse(X) else np.asarray(X)
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    else:
        v0 = np.full(min(n, m), 1.0 / np.sqrt(min(n, m)))
        U, s, Vt = spla.svds(X, k=d, v0=v0)
        order = np.argsort(-s)
        U, s, Vt = U[:, order], s[order], Vt[order]
    d = _truncate_rank(s, d, "SVD")
    U, V = _fix_signs(U[:, :d], Vt[:d].T)
    return U, s[:d], V


def _scale(vecs: np.ndarray, vals: np.ndarray) -> np.ndarray:
    return vecs * np.sqrt(np.abs(vals))


def _omnibus_operator(As):
    """Matrix-free omnibus matrix: A_m on the diagonal, (A_m + A_l)/2 off it."""
    M, n = len(As), As[0].shape[0]

    def matvec(x):
        xs = np.asarray(x).reshape(M, n)
        s = xs.sum(axis=0)
        t = np.sum([A @ xs[m] for m, A in enumerate(As)], axis=0)
        # (O x)_m = (A_m s + sum_l A_l x_l) / 2
        out = 0.5 * (np.stack([A @ s for A in As]) + t[None, :])
        return out.ravel()

    return spla.LinearOperator((M * n, M * n), matvec=matvec, dtype=np.float64)


def _omnibus_dense(As) -> np.ndarray:
    M, n = len(As), As[0].shape[0]
    dense = [A.toarray() for A in As]
    O = np.empty((M * n, M * n))
    for m in range(M):
        for l in range(M):
            O[m * n:(m + 1) * n, l * n:(l + 1) * n] = 0.5 * (dense[m] + dense[l])
    return O


def omnibus_embed(collection: GraphCollection, d: int) -> np.ndarray:
    """Spectral embedding of the joint Mn x Mn omnibus matrix.

    Returns the stacked (M*n) x d embedding with rows grouped by graph;
    average the M rows of a vertex for its classification representation.
    """
    As = [_to_csr(g) for g in collection.graphs]
    M, n = len(As), collection.n
    if M * n <= DENSE_LIMIT:
        vals, vecs = top_eigenpairs(_omnibus_dense(As), d)
    else:
        vals, vecs = top_eigenpairs(_omnibus_operator(As), d)
    return _scale(vecs, vals)


def omnibus_vertex_embedding(stacked: np.ndarray, M: int) -> np.ndarray:
    """Per-vertex representation: mean of the vertex's rows across blocks."""
    n = stacked.shape[0] // M
    return stacked.reshape(M, n, -1).mean(axis=0)


def mase_embed(collection: GraphCollection, d: int, d_stage1: int = 30) -> np.ndarray:
    """Per-graph spectral bases concatenated, then re-projected to n x d.

    Stage one keeps the leading eigenvector bases unscaled (the per-graph
    scale lives in graph-specific score matrices, not the shared subspace),
    so every graph competes equally in the second projection.
    """
    stage1 = []
    for g in collection.graphs:
        A = _to_csr(g)
        r = min(d_stage1, A.shape[0] - 1) if A.shape[0] > DENSE_LIMIT else min(d_stage1, A.shape[0])
        _, vecs = top_eigenpairs(A, r)
        stage1.append(vecs)
    C = np.hstack(stage1)
    U, s, _ = truncated_svd(C, min(d, min(C.shape)))
    return U * s


def use_embed(collection: GraphCollection, d: int) -> np.ndarray:
    """SVD of the n x Mn unfolding; returns the n x (M*d) representation with
    one scaled right-factor block per graph."""
    As = [_to_csr(g) for g in collection.graphs]
    n = collection.n
    unfold = sp.hstack(As, format="csr")
    _, s, V = truncated_svd(unfold, d)
    scaled = _scale(V, s)  # V * sqrt(s)
    blocks = [scaled[m * n:(m + 1) * n] for m in range(len(As))]
    return np.hstack(blocks)


def sweep_embeddings(method: str, collection: GraphCollection,
                     d_max: int = 30) -> Callable[[int], np.ndarray]:
    """One decomposition at d_max; returns take(d) slicing out the prefix-d
    vertex representation for any d <= d_max."""
    M, n = collection.M, collection.n
    if method == "omnibus":
        stacked = omnibus_embed(collection, min(d_max, M * n))

        def take(d):
            return omnibus_vertex_embedding(stacked[:, :d], M)
    elif method == "mase":
        full = mase_embed(collection, d_max)

        def take(d):
            return full[:, :d]
    elif method == "use":
        full = use_embed(collection, d_max)
        width = full.shape[1] // M

        def take(d):
            return np.hstack([full[:, m * width:m * width + d] for m in range(M)])
    else:
        raise ValueError(f"unknown spectral method: {method!r}")
    return take


def best_d_error(method: str, collection: GraphCollection, labels: LabelVector,
                 protocol: EvalProtocol, d_max: int = 30):
    """Sweep d = 1..d_max with shared folds and return (d*, report) at the
    minimum mean error; ties resolve to the smallest d."""
    take = sweep_embeddings(method, collection, d_max)
    avail = take(d_max).shape[1] // (collection.M if method == "use" else 1)
    best_d, best_report = None, None
    for d in range(1, min(d_max, avail) + 1):
        report = cross_validate_embedding(take(d), labels, protocol)
        if best_report is None or report.mean_error < best_report.mean_error:
            best_d, best_report = d, report
    return best_d, best_report
