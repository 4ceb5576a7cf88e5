"""Undirected simple graphs in CSR form, plus cuts and k-hop neighborhoods."""

import numpy as np

from . import _kernels
from .errors import DisconnectedGraph, EmptySubset, InvalidIndex, LengthMismatch


class Graph:
    """Immutable undirected simple graph.

    Attributes
    ----------
    n : int
        Number of nodes, labelled 0..n-1.
    edges : (m, 2) int64 array
        Canonical edge list: u < v, unique, lexicographically sorted.
    indptr, indices : int64 arrays
        CSR adjacency with neighbor lists sorted ascending.
    edge_ids : int64 array
        For each directed CSR slot, the row of `edges` it came from.
    dropped_self_loops, dropped_duplicates : int
        Bookkeeping from construction.
    """

    __slots__ = (
        "n",
        "edges",
        "indptr",
        "indices",
        "edge_ids",
        "dropped_self_loops",
        "dropped_duplicates",
    )

    def __init__(self, n, edges, *, _loops=0, _dups=0):
        self.n = int(n)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.edges = edges
        m = edges.shape[0]
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(m, dtype=np.int64)] * 2)
        order = np.lexsort((dst, src))
        self.indices = np.ascontiguousarray(dst[order])
        self.edge_ids = np.ascontiguousarray(eid[order])
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        self.indptr = indptr
        self.dropped_self_loops = _loops
        self.dropped_duplicates = _dups

    @property
    def m(self):
        return self.edges.shape[0]

    @property
    def degrees(self):
        return self.indptr[1:] - self.indptr[:-1]

    def neighbors(self, u):
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def num_components(self):
        if self.n == 0:
            return 0
        return int(_kernels.component_labels(self.indptr, self.indices)[1])

    def is_connected(self):
        return self.num_components() <= 1

    def edge_id(self, u, v):
        """Row of `edges` holding {u, v}, or -1 if absent."""
        lo, hi = self.indptr[u], self.indptr[u + 1]
        pos = lo + np.searchsorted(self.indices[lo:hi], v)
        if pos < hi and self.indices[pos] == v:
            return int(self.edge_ids[pos])
        return -1

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(n, edges, *, require_connected=True):
    """Validate and canonicalize an edge list into a Graph.

    Self-loops and duplicate edges are dropped (counts retained on the
    result).  Node indices outside [0, n) raise InvalidIndex; a
    disconnected result raises DisconnectedGraph unless told otherwise.
    """
    n = int(n)
    if n <= 0:
        raise InvalidIndex(f"graph needs at least one node, got n={n}")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        bad = edges[(edges < 0) | (edges >= n)].flat[0]
        raise InvalidIndex(f"edge endpoint {bad} outside [0, {n})")
    loops = int((edges[:, 0] == edges[:, 1]).sum())
    edges = edges[edges[:, 0] != edges[:, 1]]
    edges = np.sort(edges, axis=1)
    before = edges.shape[0]
    edges = np.unique(edges, axis=0) if before else edges
    g = Graph(n, edges, _loops=loops, _dups=before - edges.shape[0])
    if require_connected:
        comps = g.num_components()
        if comps > 1:
            raise DisconnectedGraph(comps)
    return g


def cutsize(graph, labels):
    """Number of edges whose endpoints carry different labels."""
    labels = np.asarray(labels)
    if labels.shape[0] != graph.n:
        raise LengthMismatch(f"{labels.shape[0]} labels for {graph.n} nodes")
    if graph.m == 0:
        return 0
    return int((labels[graph.edges[:, 0]] != labels[graph.edges[:, 1]]).sum())


class Split:
    """Disjoint train/validation/test node-index sets."""

    __slots__ = ("train", "val", "test")

    def __init__(self, train, val, test):
        self.train = np.asarray(train, dtype=np.int64)
        self.val = np.asarray(val, dtype=np.int64)
        self.test = np.asarray(test, dtype=np.int64)
        if self.train.size == 0:
            raise EmptySubset("train set must be non-empty")
        combined = np.concatenate([self.train, self.val, self.test])
        if len(np.unique(combined)) != len(combined):
            raise InvalidIndex("split sets must be pairwise disjoint")

    def validate_for(self, n):
        for name, part in (("train", self.train), ("val", self.val), ("test", self.test)):
            if part.size and (part.min() < 0 or part.max() >= n):
                raise InvalidIndex(f"{name} index outside [0, {n})")
        return self

    def __repr__(self):
        return f"Split(train={len(self.train)}, val={len(self.val)}, test={len(self.test)})"


class Subgraph:
    """Induced subgraph together with the node mapping back to the parent.

    nodes[i] is the parent-graph id of local node i; nodes is sorted
    ascending, so local ids preserve the parent order.
    """

    __slots__ = ("nodes", "graph")

    def __init__(self, nodes, graph):
        self.nodes = nodes
        self.graph = graph

    def to_local(self, parent_ids):
        """Map parent-graph ids to local ids; raises on ids outside the subgraph."""
        parent_ids = np.asarray(parent_ids, dtype=np.int64)
        pos = np.searchsorted(self.nodes, parent_ids)
        ok = (pos < len(self.nodes)) & (self.nodes[np.minimum(pos, len(self.nodes) - 1)] == parent_ids)
        if not ok.all():
            raise InvalidIndex(f"node {parent_ids[~ok].flat[0]} not in subgraph")
        return pos

    def __repr__(self):
        return f"Subgraph(nodes={len(self.nodes)}, edges={self.graph.m})"


def k_hop_neighborhood(graph, seeds, k):
    """Subgraph induced on all nodes within k hops of any seed.

    k = 0 keeps exactly the seed set.  The induced subgraph may be
    disconnected; that is fine for restricted training.
    """
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.size == 0:
        raise EmptySubset("k-hop neighborhood needs at least one seed")
    if seeds.min() < 0 or seeds.max() >= graph.n:
        raise InvalidIndex(f"seed {seeds[(seeds < 0) | (seeds >= graph.n)].flat[0]} outside [0, {graph.n})")
    if k < 0:
        raise InvalidIndex(f"hop count must be nonnegative, got {k}")
    dist = _kernels.khop_distances(graph.indptr, graph.indices, seeds, int(k))
    nodes = np.flatnonzero(dist >= 0).astype(np.int64)
    remap = np.full(graph.n, -1, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes), dtype=np.int64)
    out_u, out_v = _kernels.induced_edges(graph.indptr, graph.indices, remap, graph.m)
    edges = np.stack([out_u, out_v], axis=1) if len(out_u) else np.empty((0, 2), dtype=np.int64)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))] if len(edges) else edges
    return Subgraph(nodes, Graph(len(nodes), edges))
