"""Directed graph storage, connectivity and the synthetic generators.

Graphs are stored as a sparse triplet list (src, dst, weight) with strictly
positive weights. Dense and CSR views are produced on demand; every
operator built on top of a graph works with dense matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import InvalidArgumentError


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Weighted directed graph on vertices ``0..n_vertices-1``.

    Build instances with :meth:`from_edges` or :meth:`from_adjacency`; they
    sum duplicate edges and drop zero weights. All arrays are read-only.
    """

    n_vertices: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_edges(cls, n_vertices, edges):
        """Build from an iterable of ``(src, dst)`` or ``(src, dst, weight)``."""
        n = int(n_vertices)
        if n < 1:
            raise InvalidArgumentError("a graph needs at least one vertex")
        rows, cols, vals = [], [], []
        for e in edges:
            if len(e) == 2:
                s, d = e
                w = 1.0
            else:
                s, d, w = e
            rows.append(int(s))
            cols.append(int(d))
            vals.append(float(w))
        return cls._from_coo(n, np.asarray(rows, dtype=np.int64),
                             np.asarray(cols, dtype=np.int64),
                             np.asarray(vals, dtype=float))

    @classmethod
    def from_adjacency(cls, W):
        W = sp.coo_matrix(W)
        if W.shape[0] != W.shape[1]:
            raise InvalidArgumentError(f"adjacency must be square, got {W.shape}")
        return cls._from_coo(W.shape[0], W.row.astype(np.int64),
                             W.col.astype(np.int64), W.data.astype(float))

    @classmethod
    def _from_coo(cls, n, rows, cols, vals):
        if rows.size:
            if rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n:
                raise InvalidArgumentError("vertex id out of range")
            if np.any(~np.isfinite(vals)) or np.any(vals < 0):
                raise InvalidArgumentError("edge weights must be finite and nonnegative")
        # duplicates are summed
        W = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        W.sum_duplicates()
        W.eliminate_zeros()
        W = W.tocoo()
        order = np.lexsort((W.col, W.row))
        return cls(n, _readonly(W.row[order].astype(np.int64)),
                   _readonly(W.col[order].astype(np.int64)),
                   _readonly(W.data[order].astype(float)))

    @property
    def n_edges(self):
        return int(self.src.size)

    @property
    def edges(self):
        return list(zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()))

    @property
    def out_degrees(self):
        return np.bincount(self.src, weights=self.weight, minlength=self.n_vertices)

    @property
    def in_degrees(self):
        return np.bincount(self.dst, weights=self.weight, minlength=self.n_vertices)

    def sparse(self):
        return sp.csr_matrix((self.weight, (self.src, self.dst)),
                             shape=(self.n_vertices, self.n_vertices))

    def adjacency(self):
        """Dense weighted adjacency matrix W with W[i, j] = w(i, j)."""
        W = np.zeros((self.n_vertices, self.n_vertices))
        W[self.src, self.dst] = self.weight
        return W

    def subgraph(self, vertices):
        """Induced subgraph on ``vertices`` (new ids follow the given order)."""
        vertices = np.asarray(vertices, dtype=np.int64)
        relabel = -np.ones(self.n_vertices, dtype=np.int64)
        relabel[vertices] = np.arange(vertices.size)
        keep = (relabel[self.src] >= 0) & (relabel[self.dst] >= 0)
        return DirectedGraph._from_coo(int(vertices.size), relabel[self.src[keep]],
                                       relabel[self.dst[keep]], self.weight[keep])

    def is_symmetric(self, tol=0.0):
        W = self.sparse()
        return abs(W - W.T).max() <= tol if W.nnz else True

    def __repr__(self):
        return f"DirectedGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def strongly_connected_components(g):
    """Partition the vertices into strongly connected components.

    Components are returned as sorted vertex lists, ordered by their smallest
    vertex id.
    """
    _, labels = connected_components(g.sparse(), directed=True, connection="strong")
    comps = {}
    for v, lab in enumerate(labels.tolist()):
        comps.setdefault(lab, []).append(v)
    return sorted(comps.values(), key=lambda c: c[0])


def is_strongly_connected(g):
    return len(strongly_connected_components(g)) == 1


def largest_scc_subgraph(g):
    """Return ``(subgraph, mapping)`` for the largest SCC.

    ``mapping[new_id]`` is the original vertex id. Ties between equally
    large components go to the one containing the smallest original id.
    """
    comps = strongly_connected_components(g)
    best = max(comps, key=lambda c: (len(c), -c[0]))
    mapping = np.asarray(best, dtype=np.int64)
    return g.subgraph(mapping), mapping


def symmetrize(g):
    """Undirected version with W_sym = (W + W^T) / 2."""
    W = g.sparse()
    return DirectedGraph.from_adjacency((W + W.T) * 0.5)


def period(g):
    """Period of a strongly connected graph (gcd of its cycle lengths).

    Uses BFS levels from vertex 0: the period is the gcd of
    ``level[u] + 1 - level[v]`` over every edge ``u -> v``.
    """
    if g.n_edges == 0:
        return 0
    order, pred = breadth_first_order(g.sparse(), 0, directed=True,
                                      return_predecessors=True)
    level = np.full(g.n_vertices, -1, dtype=np.int64)
    level[0] = 0
    for v in order[1:]:
        level[v] = level[pred[v]] + 1
    reached = (level[g.src] >= 0) & (level[g.dst] >= 0)
    diffs = np.abs(level[g.src[reached]] + 1 - level[g.dst[reached]])
    return int(reduce(math.gcd, diffs.tolist(), 0))


def gen_directed_cycle(n):
    """Directed cycle C_n with edges i -> i+1 (mod n), unit weights."""
    if int(n) != n or n < 2:
        raise InvalidArgumentError(f"cycle needs n >= 2, got {n}")
    n = int(n)
    return DirectedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def gen_directed_torus(m, n):
    """Directed torus T_{m,n} = C_m x C_n, adjacency C_m (x) I_n + I_m (x) C_n.

    Vertex ``(a, b)`` has id ``a * n + b``.
    """
    if int(m) != m or int(n) != n or m < 2 or n < 2:
        raise InvalidArgumentError(f"torus needs m, n >= 2, got {m}, {n}")
    m, n = int(m), int(n)
    Cm = gen_directed_cycle(m).sparse()
    Cn = gen_directed_cycle(n).sparse()
    W = sp.kron(Cm, sp.identity(n)) + sp.kron(sp.identity(m), Cn)
    return DirectedGraph.from_adjacency(W)


def gen_directed_watts_strogatz(n, k, beta, seed=None):
    """Directed Watts-Strogatz graph DWS(n, k, beta).

    Starts from the circulant graph where vertex i points to its k next
    vertices i+1..i+k. Vertices are then swept in increasing (clockwise)
    order and each of their original edges is rewired with probability
    ``beta`` to a uniformly drawn target that is neither ``i`` nor already a
    target of ``i``. Out-degrees therefore stay exactly ``k``.
    """
    if int(n) != n or int(k) != k or k < 1 or n <= 2 * k:
        raise InvalidArgumentError(f"DWS needs integers with n > 2k >= 2, got n={n}, k={k}")
    if not 0.0 <= beta <= 1.0:
        raise InvalidArgumentError(f"rewiring probability must lie in [0, 1], got {beta}")
    n, k = int(n), int(k)
    rng = np.random.default_rng(seed)
    targets = [[(i + o) % n for o in range(1, k + 1)] for i in range(n)]
    for i in range(n):
        for slot in range(k):
            if rng.random() < beta:
                taken = set(targets[i])
                taken.add(i)
                allowed = [v for v in range(n) if v not in taken]
                targets[i][slot] = allowed[int(rng.integers(len(allowed)))]
    return DirectedGraph.from_edges(n, [(i, t) for i in range(n) for t in targets[i]])


def read_edge_list(path):
    """Read a ``src<TAB>dst[<TAB>weight]`` file; ``#`` lines are comments.

    The vertex count is one more than the largest id seen. Duplicate
    edges are summed.
    """
    edges = []
    n = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise InvalidArgumentError(f"{path}:{lineno}: expected 2 or 3 fields")
            try:
                s, d = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise InvalidArgumentError(f"{path}:{lineno}: {exc}") from None
            if s < 0 or d < 0:
                raise InvalidArgumentError(f"{path}:{lineno}: negative vertex id")
            edges.append((s, d, w))
            n = max(n, s + 1, d + 1)
    if n == 0:
        raise InvalidArgumentError(f"{path}: no edges")
    return DirectedGraph.from_edges(n, edges)


def read_labels(path, n_vertices):
    """Read ``vertex<TAB>label`` lines into a length-``n_vertices`` array.

    Labels must be -1 or +1; vertices absent from the file get 0.
    """
    labels = np.zeros(n_vertices)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                v, lab = int(parts[0]), int(float(parts[1]))
            except (ValueError, IndexError):
                raise InvalidArgumentError(f"{path}:{lineno}: malformed label line") from None
            if lab not in (-1, 1):
                raise InvalidArgumentError(f"{path}:{lineno}: label must be -1 or +1")
            if not 0 <= v < n_vertices:
                raise InvalidArgumentError(f"{path}:{lineno}: vertex {v} out of range")
            labels[v] = lab
    return labels
