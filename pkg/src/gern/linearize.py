"""Depth-first linearization of spanning trees into Random Path Graphs."""

import numpy as np

from . import _kernels
from .errors import InvalidStart, LengthMismatch
from .graph import Graph


class PathGraph:
    """Path over all n nodes; order[t] is the t-th visited node."""

    __slots__ = ("order", "_pos")

    def __init__(self, order):
        self.order = np.asarray(order, dtype=np.int64)
        self._pos = None

    @property
    def n(self):
        return self.order.shape[0]

    @property
    def positions(self):
        """Inverse permutation: positions[node] = index along the path."""
        if self._pos is None:
            pos = np.empty(self.n, dtype=np.int64)
            pos[self.order] = np.arange(self.n, dtype=np.int64)
            self._pos = pos
        return self._pos

    @property
    def edges(self):
        """Canonical (n-1, 2) edge list of consecutive pairs."""
        if self.n < 2:
            return np.empty((0, 2), dtype=np.int64)
        e = np.sort(np.stack([self.order[:-1], self.order[1:]], axis=1), axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def as_graph(self):
        return Graph(self.n, self.edges)

    def __repr__(self):
        return f"PathGraph(n={self.n})"


def dfs_linearize(tree, rng, start=None):
    """Depth-first preorder of the tree with shuffled child order.

    start defaults to a uniformly random node; pass one for deterministic
    tests.  Consecutive path nodes are joined by the tree path the DFS
    walked, which is what caps the path cut-size at twice the tree's.
    """
    n = tree.n
    if start is None:
        start = int(rng.integers(n))
    elif not 0 <= start < n:
        raise InvalidStart(f"start node {start} outside [0, {n})")
    tindptr, tindices = tree.csr()
    order = _kernels.dfs_preorder(tindptr, tindices, start, rng.state)
    return PathGraph(order)


def path_cutsize(path, labels):
    """Number of consecutive path pairs with differing labels."""
    labels = np.asarray(labels)
    if labels.shape[0] != path.n:
        raise LengthMismatch(f"{labels.shape[0]} labels for {path.n} nodes")
    if path.n < 2:
        return 0
    along = labels[path.order]
    return int((along[:-1] != along[1:]).sum())
