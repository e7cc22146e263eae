"""Shared data model for multi-graph collections on a common vertex set.

Vertices are 0-based inside the library; edgelist *files* are 1-based
(one edge per line, "u v w" with w optional) and get rebased on load.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EdgeList:
    """Sparse graph as parallel arrays (u, v, w) over n vertices.

    Undirected edges are stored once; consumers apply them in both
    directions unless ``directed`` is set. Indices are 0-based.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    n: int
    directed: bool = False

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u))
        v = np.atleast_1d(np.asarray(self.v))
        w = np.atleast_1d(np.asarray(self.w, dtype=np.float64))
        if not (len(u) == len(v) == len(w)):
            raise ValueError("u, v, w must have equal length")
        if u.dtype.kind != "i":
            u = u.astype(np.int64)
        if v.dtype.kind != "i":
            v = v.astype(np.int64)
        for name, arr in (("u", u), ("v", v), ("w", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n", int(self.n))

    @property
    def num_edges(self) -> int:
        return len(self.u)

    def reweighted(self, w: np.ndarray) -> "EdgeList":
        return EdgeList(self.u, self.v, w, self.n, self.directed)


def make_edgelist(u, v, w=None, *, n: int, directed: bool = False,
                  simple: bool = False) -> EdgeList:
    """Build an EdgeList from 0-based index arrays.

    ``simple`` declares the graph loop-free: self-loops in the input are
    dropped with a warning. Weight defaults to 1 per edge.
    """
    u = np.atleast_1d(np.asarray(u, dtype=np.int64))
    v = np.atleast_1d(np.asarray(v, dtype=np.int64))
    if w is None:
        w = np.ones(len(u))
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    if simple:
        loops = u == v
        if loops.any():
            warnings.warn(
                f"dropping {int(loops.sum())} self-loop(s) from graph declared simple",
                stacklevel=2,
            )
            keep = ~loops
            u, v, w = u[keep], v[keep], w[keep]
    return EdgeList(u, v, w, n=n, directed=directed)


@dataclass(frozen=True)
class DenseGraph:
    """Dense weighted graph (similarity matrix); avoids edge expansion."""

    matrix: np.ndarray
    directed: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class GraphCollection:
    """Ordered sequence of graphs sharing one vertex set."""

    graphs: tuple

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))

    @property
    def M(self) -> int:
        return len(self.graphs)

    @property
    def n(self) -> int:
        return self.graphs[0].n

    def subset(self, indices: Sequence[int]) -> "GraphCollection":
        """New collection keeping graphs at the given 0-based positions."""
        return GraphCollection(tuple(self.graphs[i] for i in indices))


@dataclass(frozen=True)
class LabelVector:
    """Per-vertex class labels in {0..K}; 0 marks an unknown label."""

    y: np.ndarray
    K: int

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.y, dtype=np.int64))
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "K", int(self.K))

    @property
    def n(self) -> int:
        return len(self.y)


def as_labels(y, K: int | None = None) -> LabelVector:
    """Coerce an int sequence (or LabelVector) to a LabelVector.

    K defaults to max(y); pass it explicitly when trailing classes may be
    absent from this particular vector.
    """
    if isinstance(y, LabelVector):
        return y
    y = np.atleast_1d(np.asarray(y, dtype=np.int64))
    if K is None:
        K = int(y.max()) if len(y) else 0
    return LabelVector(y, K)


@dataclass
class ValidationReport:
    """Outcome of validate_collection; empty iff the input is usable."""

    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(self.violations)


def validate_collection(collection: GraphCollection, labels: LabelVector) -> ValidationReport:
    """Check a collection/label pair; reports violations, never raises."""
    report = ValidationReport()
    if collection.M < 1:
        report.violations.append("collection has no graphs")
        return report
    n = collection.graphs[0].n
    for m, g in enumerate(collection.graphs):
        if g.n != n:
            report.violations.append(
                f"vertex-count mismatch: graph {m + 1} has n={g.n}, graph 1 has n={n}"
            )
        if isinstance(g, EdgeList) and g.num_edges:
            lo = min(int(g.u.min()), int(g.v.min()))
            hi = max(int(g.u.max()), int(g.v.max()))
            if lo < 0 or hi >= g.n:
                report.violations.append(
                    f"graph {m + 1}: vertex index out of range [0, {g.n - 1}]"
                )
        if isinstance(g, EdgeList) and not np.isfinite(g.w).all():
            report.violations.append(f"graph {m + 1}: non-finite edge weight")
    y = labels.y
    if len(y) != n:
        report.violations.append(
            f"label length {len(y)} does not match vertex count {n}"
        )
    if len(y) and (y.min() < 0 or y.max() > labels.K):
        report.violations.append(f"label outside 0..{labels.K}")
    counts = np.bincount(y[(y >= 1) & (y <= labels.K)], minlength=labels.K + 1)[1:]
    if labels.K >= 1 and counts.sum() == 0:
        report.violations.append("no training labels")
    else:
        for k in np.flatnonzero(counts == 0):
            report.violations.append(f"empty class {k + 1}")
    return report


def to_adjacency(e, symmetric: bool | None = None) -> np.ndarray:
    """Densify a graph; duplicate edges are summed. Oracle/baseline use only.

    ``symmetric`` defaults to the graph's undirected flag. Self-loops land
    on the diagonal once regardless of symmetry.
    """
    if isinstance(e, DenseGraph):
        return np.array(e.matrix)
    if symmetric is None:
        symmetric = not e.directed
    A = np.zeros((e.n, e.n))
    np.add.at(A, (e.u, e.v), e.w)
    if symmetric:
        off = e.u != e.v
        np.add.at(A, (e.v[off], e.u[off]), e.w[off])
    return A


def from_adjacency(A: np.ndarray, *, directed: bool = False) -> EdgeList:
    """Extract an EdgeList from a dense matrix (inverse of to_adjacency)."""
    A = np.asarray(A)
    if directed:
        u, v = np.nonzero(A)
    else:
        u, v = np.nonzero(np.triu(A))
    return EdgeList(u, v, A[u, v], n=A.shape[0], directed=directed)


def read_edgelist(path, *, n: int | None = None, directed: bool = False,
                  simple: bool = False) -> EdgeList:
    """Load a 1-based text edgelist: "u v [w]", '#' comments ignored.

    Separator may be whitespace or commas. n defaults to the largest index
    seen.
    """
    us, vs, ws = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            us.append(int(parts[0]))
            vs.append(int(parts[1]))
            ws.append(float(parts[2]) if len(parts) == 3 else 1.0)
    u = np.asarray(us, dtype=np.int64) - 1
    v = np.asarray(vs, dtype=np.int64) - 1
    w = np.asarray(ws)
    if len(u) and min(u.min(), v.min()) < 0:
        raise ValueError(f"{path}: vertex indices must be >= 1")
    if n is None:
        n = int(max(u.max(), v.max())) + 1 if len(u) else 0
    return make_edgelist(u, v, w, n=n, directed=directed, simple=simple)


def write_edgelist(e: EdgeList, path) -> None:
    """Write an EdgeList in the 1-based text format."""
    with open(path, "w") as fh:
        for u, v, w in zip(e.u, e.v, e.w):
            fh.write(f"{u + 1} {v + 1} {float(w)!r}\n")


def read_labels(path, K: int | None = None) -> LabelVector:
    """Load a label file: one integer per line, line i = label of vertex i."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                vals.append(int(line))
    return as_labels(np.asarray(vals, dtype=np.int64), K)


def read_vertex_ids(path) -> np.ndarray:
    """Load per-vertex external ids (one per line) used for matching."""
    with open(path) as fh:
        ids = [line.strip() for line in fh if line.strip()]
    return np.asarray(ids, dtype=object)
