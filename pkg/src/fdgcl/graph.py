"""Graph data model, GCN normalization, and dataset file ingestion.

File formats
------------
edge list   : UTF-8 text, one edge per line as ``u<TAB>v`` (0-indexed
              integers); lines starting with ``#`` are ignored.
features    : headerless CSV, N rows x d_in real columns.
labels      : one integer per line, N lines.
split       : JSON object with integer arrays ``train``, ``val``, ``test``.

Node order is file order; every artifact output indexes nodes identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import FormatError, ShapeError


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with GCN-normalized operators.

    ``norm_adjacency`` is  D~^(-1/2) (A + I) D~^(-1/2)  where D~ is the
    degree matrix of A + I (self-loops added for normalization only, so
    isolated nodes get degree 1).  ``laplacian`` is I minus that matrix;
    its eigenvalues lie in [0, 2].
    """

    num_nodes: int
    adjacency: sp.csr_matrix          # undirected, deduplicated, no self-loops
    norm_adjacency: sp.csr_matrix     # symmetric, GCN-normalized
    laplacian: sp.csr_matrix          # I - norm_adjacency
    _rw_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def num_edges(self) -> int:
        return self.adjacency.nnz // 2

    def rw_adjacency(self) -> sp.csr_matrix:
        """Row-stochastic D~^(-1) (A + I); used by the reaction term."""
        if "rw" not in self._rw_cache:
            n = self.num_nodes
            at = (self.adjacency + sp.identity(n, format="csr")).tocsr()
            deg = np.asarray(at.sum(axis=1)).ravel()
            inv = np.where(deg > 0, 1.0 / deg, 0.0)
            self._rw_cache["rw"] = sp.diags(inv).dot(at).tocsr()
        return self._rw_cache["rw"]

    @classmethod
    def from_normalized(cls, norm_adj) -> "Graph":
        """Wrap an explicit normalized adjacency (test/diagnostic helper).

        Accepts any square symmetric matrix; no self-loop handling is
        applied.  Useful for driving the solver with a prescribed
        spectrum (e.g. the scalar mode problem via a 1x1 matrix).
        """
        a = sp.csr_matrix(np.atleast_2d(np.asarray(norm_adj, dtype=float)))
        n = a.shape[0]
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"normalized adjacency must be square, got {a.shape}")
        lap = (sp.identity(n, format="csr") - a).tocsr()
        return cls(num_nodes=n, adjacency=sp.csr_matrix((n, n)),
                   norm_adjacency=a, laplacian=lap)


@dataclass(frozen=True)
class Dataset:
    graph: Graph
    features: np.ndarray          # N x d_in
    labels: np.ndarray            # N, integer classes
    split: dict                   # {"train": idx, "val": idx, "test": idx}

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0


def build_graph(edge_list, num_nodes: int, self_loops: bool = True) -> Graph:
    """Build a normalized Graph from (u, v) pairs.

    Input self-loops are dropped and duplicate/reversed edges collapse to
    one undirected edge.  ``self_loops=False`` skips the +I in the
    normalization (ablation flag ``--no-self-loops``); zero-degree rows
    then normalize to zero.
    """
    n = int(num_nodes)
    if n <= 0:
        raise FormatError(f"num_nodes must be positive, got {num_nodes}")
    rows, cols = [], []
    for u, v in edge_list:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) out of range for {n} nodes")
        if u == v:
            continue
        rows.append(u)
        cols.append(v)
    data = np.ones(len(rows))
    a = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    a = a + a.T
    a.data[:] = 1.0  # collapse duplicates
    a.eliminate_zeros()

    at = a + sp.identity(n, format="csr") if self_loops else a.copy()
    deg = np.asarray(at.sum(axis=1)).ravel()
    with np.errstate(divide="ignore"):
        dinv = 1.0 / np.sqrt(deg)
    dinv[~np.isfinite(dinv)] = 0.0
    dhalf = sp.diags(dinv)
    norm = (dhalf @ at @ dhalf).tocsr()
    lap = (sp.identity(n, format="csr") - norm).tocsr()
    return Graph(num_nodes=n, adjacency=a, norm_adjacency=norm, laplacian=lap)


def is_connected(graph: Graph) -> bool:
    """BFS reachability from node 0 over the undirected edge set."""
    n = graph.num_nodes
    if n <= 1:
        return True
    indptr, indices = graph.adjacency.indptr, graph.adjacency.indices
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


def read_edge_list(path) -> list:
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError("expected 'u<TAB>v'", path=path, line=ln)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise FormatError(f"non-integer node id {parts!r}",
                                  path=path, line=ln) from None
            edges.append((u, v, ln))
    return edges


def read_features_csv(path) -> np.ndarray:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise FormatError(
                    f"row has {len(parts)} columns, expected {width}",
                    path=path, line=ln)
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise FormatError("non-numeric feature value",
                                  path=path, line=ln) from None
    if not rows:
        raise FormatError("empty feature file", path=path, line=1)
    return np.asarray(rows, dtype=float)


def read_labels(path) -> np.ndarray:
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise FormatError(f"non-integer label {line!r}",
                                  path=path, line=ln) from None
    if not labels:
        raise FormatError("empty label file", path=path, line=1)
    return np.asarray(labels, dtype=int)


def read_split(path, num_nodes: int) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}", path=path,
                              line=exc.lineno) from None
    split = {}
    for key in ("train", "val", "test"):
        if key not in obj:
            raise FormatError(f"split file missing key {key!r}", path=path)
        idx = np.asarray(obj[key], dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= num_nodes):
            raise FormatError(f"split {key!r} has out-of-range index",
                              path=path)
        split[key] = idx
    seen = np.concatenate([split[k] for k in ("train", "val", "test")])
    if len(np.unique(seen)) != len(seen):
        raise FormatError("split sets are not disjoint", path=path)
    return split


def load_dataset(graph_path, features_path, labels_path, split_path,
                 self_loops: bool = True) -> Dataset:
    """Load and cross-validate the four dataset files.

    N is the number of label lines; the feature row count must match it
    and every edge endpoint must lie in [0, N).
    """
    labels = read_labels(labels_path)
    n = len(labels)
    features = read_features_csv(features_path)
    if features.shape[0] != n:
        raise ShapeError(
            f"feature rows ({features.shape[0]}) != label count ({n})")
    raw = read_edge_list(graph_path)
    for u, v, ln in raw:
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) out of range for {n} nodes",
                              path=graph_path, line=ln)
    graph = build_graph([(u, v) for u, v, _ in raw], n, self_loops=self_loops)
    split = read_split(split_path, n)
    return Dataset(graph=graph, features=features, labels=labels, split=split)
