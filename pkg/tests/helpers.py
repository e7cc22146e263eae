"""Shared test fixtures: independent oracles and random-input generators."""

import numpy as np

from gfee import EdgeList, as_labels, to_adjacency


def row_normalize(Z):
    """Reference row normalization: nonzero rows to unit norm, zero rows kept."""
    Z = np.array(Z, dtype=np.float64)
    for i in range(Z.shape[0]):
        nrm = np.sqrt((Z[i] ** 2).sum())
        if nrm > 0:
            Z[i] = Z[i] / nrm
    return Z


def dense_embed_oracle(e, W):
    """Dense reference for the sparse embedding path: normalize(A @ W)."""
    return row_normalize(to_adjacency(e) @ np.asarray(W))


def random_graph(rng, n, density=0.15, weighted=True, directed=False, loops=False):
    """Random EdgeList, stored-once for undirected graphs."""
    if directed:
        u, v = np.nonzero(rng.random((n, n)) < density)
    else:
        u, v = np.nonzero(np.triu(rng.random((n, n)) < density, k=0 if loops else 1))
    if not loops:
        keep = u != v
        u, v = u[keep], v[keep]
    w = rng.uniform(0.1, 3.0, len(u)) if weighted else np.ones(len(u))
    return EdgeList(u, v, w, n=n, directed=directed)


def random_labels(rng, n, K, unknown_frac=0.2):
    """Labels 1..K with every class present, a fraction zeroed out."""
    y = rng.integers(1, K + 1, size=n)
    y[:K] = np.arange(1, K + 1)  # every class present
    mask = rng.random(n) < unknown_frac
    mask[:K] = False
    y[mask] = 0
    return as_labels(y, K)


def empirical_block_density(e, y, k, l):
    """Observed edge fraction between classes k and l (1-based)."""
    A = to_adjacency(e)
    mk, ml = np.flatnonzero(y == k), np.flatnonzero(y == l)
    if k == l:
        pairs = len(mk) * (len(mk) - 1)
        return A[np.ix_(mk, mk)].sum() / pairs
    return A[np.ix_(mk, ml)].sum() / (len(mk) * len(ml))
