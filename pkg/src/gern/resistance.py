"""Effective resistance: exact Laplacian-pseudoinverse path and Monte-Carlo
estimation from spanning-tree inclusion, plus the resistance-weighted cut-size."""

import numpy as np

from . import spanning
from .errors import (
    LengthMismatch,
    MissingEdgeResistance,
    NumericalFailure,
    SizeCapExceeded,
)

SIZE_CAP = 5000
_EIG_THRESHOLD = 1e-9


class ResistanceMatrix:
    """Pairwise effective resistances, exact (full matrix) or MC (edges only)."""

    __slots__ = ("graph", "full", "edge_values", "method", "draws", "generator")

    def __init__(self, graph, full=None, edge_values=None, method="exact",
                 draws=0, generator=None):
        self.graph = graph
        self.full = full
        self.edge_values = edge_values
        self.method = method
        self.draws = draws
        self.generator = generator

    def pair(self, i, j):
        if self.full is not None:
            return float(self.full[i, j])
        if i == j:
            return 0.0
        eid = self.graph.edge_id(i, j)
        if eid < 0:
            raise MissingEdgeResistance(
                f"({i}, {j}) is not an edge; MC estimates cover edges only"
            )
        return float(self.edge_values[eid])

    def edge_resistances(self):
        """Values aligned with graph.edges rows."""
        if self.edge_values is not None:
            return self.edge_values
        e = self.graph.edges
        return self.full[e[:, 0], e[:, 1]]

    def __repr__(self):
        tag = self.method
        if self.method != "exact":
            tag = f"mc[{self.generator}](N={self.draws})"
        return f"ResistanceMatrix(n={self.graph.n}, {tag})"


def laplacian_pseudoinverse(graph, size_cap=SIZE_CAP):
    """Moore-Penrose pseudoinverse of L = D - A via dense eigendecomposition.

    The single zero eigenvalue of a connected graph is dropped; eigenvalues
    below 1e-9 times the largest are treated as zero.
    """
    n = graph.n
    if n > size_cap:
        raise SizeCapExceeded(f"n={n} exceeds the exact-resistance cap {size_cap}")
    lap = np.zeros((n, n), dtype=np.float64)
    e = graph.edges
    lap[e[:, 0], e[:, 1]] = -1.0
    lap[e[:, 1], e[:, 0]] = -1.0
    np.fill_diagonal(lap, graph.degrees.astype(np.float64))
    try:
        eigvals, eigvecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Laplacian eigendecomposition failed: {exc}") from exc
    if n == 1:
        return np.zeros((1, 1), dtype=np.float64)
    zero_mask = eigvals < _EIG_THRESHOLD * eigvals[-1]
    dropped = int(zero_mask.sum())
    if dropped != 1:
        raise NumericalFailure(
            f"expected exactly one zero eigenvalue, found {dropped} "
            "(disconnected graph or eigensolver trouble)"
        )
    inv = np.zeros_like(eigvals)
    inv[~zero_mask] = 1.0 / eigvals[~zero_mask]
    return (eigvecs * inv) @ eigvecs.T


def check_metric(values, tol=1e-8):
    """Assert symmetry, zero diagonal, and the triangle inequality."""
    n = values.shape[0]
    if not np.allclose(values, values.T, atol=tol):
        raise NumericalFailure("resistance matrix not symmetric")
    if np.abs(np.diag(values)).max() > tol:
        raise NumericalFailure("resistance matrix has nonzero diagonal")
    for j in range(n):
        slack = values[:, j, None] + values[None, j, :] - values
        if slack.min() < -tol:
            raise NumericalFailure("triangle inequality violated")


def effective_resistance_exact(graph, size_cap=SIZE_CAP):
    """Full pairwise resistance matrix r_ij = L+_ii + L+_jj - 2 L+_ij."""
    pinv = laplacian_pseudoinverse(graph, size_cap)
    d = np.diag(pinv)
    values = d[:, None] + d[None, :] - 2.0 * pinv
    np.fill_diagonal(values, 0.0)
    values = 0.5 * (values + values.T)
    e = graph.edges
    if e.shape[0]:
        edge_r = values[e[:, 0], e[:, 1]]
        if edge_r.min() <= 0.0 or edge_r.max() > 1.0 + 1e-9:
            raise NumericalFailure("edge resistance outside (0, 1]")
    # full metric verification is cubic; keep it to instances where it is cheap
    if graph.n <= 300:
        check_metric(values)
    return ResistanceMatrix(graph, full=values, method="exact")


def effective_resistance_mc(graph, draws, rng, method="wilson", beta=0.5):
    """Per-edge resistance estimates: inclusion frequency over sampled trees.

    With a uniform sampler (wilson, aldous_broder) the frequency converges to
    the exact r_ij; with a_rst or bfs it estimates that sampler's marginals.
    """
    table = spanning.edge_inclusion_frequencies(graph, method, draws, rng, beta)
    return ResistanceMatrix(
        graph, edge_values=table.frequencies, method="monte-carlo",
        draws=draws, generator=method,
    )


def resistance_weighted_cutsize(graph, labels, res):
    """Phi^R: sum of r_ij over edges whose endpoints disagree."""
    labels = np.asarray(labels)
    if labels.shape[0] != graph.n:
        raise LengthMismatch(f"{labels.shape[0]} labels for {graph.n} nodes")
    if res.graph is not graph and res.graph.n != graph.n:
        raise MissingEdgeResistance("resistance was computed for a different graph")
    e = graph.edges
    if e.shape[0] == 0:
        return 0.0
    cut = labels[e[:, 0]] != labels[e[:, 1]]
    values = res.edge_resistances()
    if values.shape[0] != e.shape[0]:
        raise MissingEdgeResistance("resistance does not cover every edge")
    return float(values[cut].sum())
