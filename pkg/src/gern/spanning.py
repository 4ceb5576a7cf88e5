"""Spanning-tree samplers: exact-uniform (Wilson, Aldous-Broder), the A-RST
hybrid, and a randomized-BFS baseline, plus edge-inclusion frequency tables."""

import math

import numpy as np

from . import _kernels, stats
from .errors import DisconnectedGraph, EdgeSetMismatch, StepCapExceeded

GENERATORS = ("wilson", "aldous_broder", "a_rst", "bfs")


class SpanningTree:
    """Rooted spanning tree as a parent array; parent[root] = -1."""

    __slots__ = ("parent", "root", "method")

    def __init__(self, parent, method="wilson"):
        self.parent = parent
        self.root = int(np.flatnonzero(parent < 0)[0])
        self.method = method

    @property
    def n(self):
        return self.parent.shape[0]

    @property
    def edges(self):
        """Canonical (n-1, 2) edge list, u < v, lexicographically sorted."""
        child = np.flatnonzero(self.parent >= 0)
        e = np.sort(np.stack([child, self.parent[child]], axis=1), axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def csr(self):
        return _kernels.tree_csr(self.parent)

    def cutsize(self, labels):
        labels = np.asarray(labels)
        child = np.flatnonzero(self.parent >= 0)
        return int((labels[child] != labels[self.parent[child]]).sum())

    def canonical_key(self):
        """Hashable identity of the undirected edge set (root-independent)."""
        return self.edges.tobytes()

    def __repr__(self):
        return f"SpanningTree(n={self.n}, root={self.root}, method={self.method!r})"


def step_cap(n):
    """Walk-step budget for Aldous-Broder before declaring a bug."""
    return int(1e4 * n * math.log(n + 1))


def _require_connected(graph):
    if not graph.is_connected():
        raise DisconnectedGraph(graph.num_components())


def _draw_parent(graph, rng, method, beta):
    if method == "wilson":
        return _kernels.wilson_parent(graph.indptr, graph.indices, rng.state)
    if method == "aldous_broder":
        cap = step_cap(graph.n)
        parent, steps = _kernels.aldous_broder_parent(graph.indptr, graph.indices, rng.state, cap)
        if steps < 0:
            raise StepCapExceeded(f"random walk exceeded {cap} steps on n={graph.n}")
        return parent
    if method == "a_rst":
        walk_steps = int(beta * graph.n)
        return _kernels.arst_parent(graph.indptr, graph.indices, rng.state, walk_steps)
    if method == "bfs":
        return _kernels.bfs_parent(graph.indptr, graph.indices, rng.state)
    raise ValueError(f"unknown generator {method!r}; choose from {GENERATORS}")


def wilson(graph, rng):
    """Uniform random spanning tree by loop-erased random walks."""
    _require_connected(graph)
    return SpanningTree(_draw_parent(graph, rng, "wilson", 0.0), "wilson")


def aldous_broder(graph, rng):
    """Uniform random spanning tree from first-entry edges of a random walk."""
    _require_connected(graph)
    return SpanningTree(_draw_parent(graph, rng, "aldous_broder", 0.0), "aldous_broder")


def a_rst(graph, rng, beta=0.5):
    """Approximate RST: first-entry walk for floor(beta*n) steps, then
    loop-erased completion.  0 < beta <= 1."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    _require_connected(graph)
    return SpanningTree(_draw_parent(graph, rng, "a_rst", beta), "a_rst")


def random_bfs_tree(graph, rng):
    """Breadth-first tree from a random root with shuffled neighbor order.

    Baseline only: its edge marginals are biased away from the uniform-RST
    ones on most graphs.
    """
    _require_connected(graph)
    return SpanningTree(_draw_parent(graph, rng, "bfs", 0.0), "bfs")


def sample_tree(graph, rng, method="wilson", beta=0.5):
    """Dispatch on generator name; see GENERATORS."""
    if method == "a_rst":
        return a_rst(graph, rng, beta)
    _require_connected(graph)
    return SpanningTree(_draw_parent(graph, rng, method, beta), method)


def validate_spanning_tree(graph, tree):
    """Check the spanning-tree invariants against the source graph.

    Raises EdgeSetMismatch when a tree edge is absent from the graph, and
    ValueError when the parent array fails to span.
    """
    n = graph.n
    if tree.n != n:
        raise EdgeSetMismatch(f"tree has {tree.n} nodes, graph has {n}")
    if int((tree.parent < 0).sum()) != 1:
        raise ValueError("tree must have exactly one root")
    for u, v in tree.edges:
        if graph.edge_id(int(u), int(v)) < 0:
            raise EdgeSetMismatch(f"tree edge ({u}, {v}) not in graph")
    # root reachability doubles as the acyclicity/spanning check
    seen = np.zeros(n, dtype=bool)
    seen[tree.root] = True
    for u in range(n):
        chain = []
        w = u
        while not seen[w]:
            chain.append(w)
            w = int(tree.parent[w])
            if len(chain) > n:
                raise ValueError("parent pointers contain a cycle")
        seen[np.asarray(chain, dtype=np.int64)] = True
    return True


class EdgeFrequencyTable:
    """Per-edge inclusion counts over N sampled trees."""

    __slots__ = ("edges", "counts", "draws")

    def __init__(self, edges, counts, draws):
        self.edges = edges
        self.counts = counts
        self.draws = int(draws)

    @property
    def frequencies(self):
        return self.counts / self.draws

    @property
    def stderrs(self):
        p = self.frequencies
        return np.sqrt(p * (1.0 - p) / self.draws)


def edge_inclusion_frequencies(graph, method, draws, rng, beta=0.5):
    """Sample `draws` trees and tally how often each graph edge appears."""
    if draws < 1:
        raise ValueError("draws must be >= 1")
    _require_connected(graph)
    counts = np.zeros(graph.m, dtype=np.int64)
    for _ in range(draws):
        parent = _draw_parent(graph, rng, method, beta)
        _kernels.tally_tree_edges(parent, graph.indptr, graph.indices, graph.edge_ids, counts)
    return EdgeFrequencyTable(graph.edges, counts, draws)


def compare_frequency_tables(a, b):
    """Mean absolute per-edge gap plus a two-sample KS test of the frequency
    collections.  Tables must cover the same edge set."""
    if a.edges.shape != b.edges.shape or not np.array_equal(a.edges, b.edges):
        raise EdgeSetMismatch("frequency tables cover different edge sets")
    fa, fb = a.frequencies, b.frequencies
    ks_stat, ks_p = stats.ks_2samp(fa, fb)
    return {
        "mean_abs_diff": float(np.abs(fa - fb).mean()),
        "ks_statistic": ks_stat,
        "ks_pvalue": ks_p,
    }
