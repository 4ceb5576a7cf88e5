"""Over-smoothing and over-squashing measurements on full graph / RST / RPG.

Protocol: untrained Glorot GCNs (dropout off), inputs drawn N(0,1), fresh
tree and path per trial.  Representations use ReLU on hidden layers and
identity on the last layer (no classifier head).  Influence values are exact
Jacobian block 1-norms computed by reverse-mode sweeps; a forward-mode
implementation exists as an independent cross-check.
"""

from dataclasses import dataclass

import numpy as np

from . import gnn, linearize, spanning, stats
from .errors import SizeCapExceeded
from .graph import Graph, k_hop_neighborhood

VARIANTS = ("full", "rst", "rpg")
_DENSE_CAP = 4000


def oversmoothing_metric(x):
    """mu(X): Frobenius norm of X minus its mean row broadcast to all rows."""
    x = np.asarray(x)
    return float(np.linalg.norm(x - x.mean(axis=0, keepdims=True)))


@dataclass
class DiagnosticRun:
    variant: str
    depth: int
    values: np.ndarray  # one entry per trial

    @property
    def mean(self):
        return stats.mean_stderr(self.values)[0]

    @property
    def stderr(self):
        return stats.mean_stderr(self.values)[1]


def _representation_forward(model, adj, x):
    """Per-layer pre-activations and the final representation (identity last)."""
    h = x
    zs = []
    last = model.num_layers - 1
    for layer, w in enumerate(model.weights):
        z = adj.matmul(h) @ w
        zs.append(z)
        h = np.maximum(z, 0) if layer < last else z
    return zs, h


def _trial_topologies(graph, rng, variants):
    tree = path = None
    if "rst" in variants or "rpg" in variants:
        tree = spanning.wilson(graph, rng)
    if "rpg" in variants:
        path = linearize.dfs_linearize(tree, rng)
    out = {}
    for v in variants:
        if v == "full":
            out[v] = graph
        elif v == "rst":
            out[v] = Graph(tree.n, tree.edges)
        else:
            out[v] = path.as_graph()
    return out, tree, path


def oversmoothing_curve(graph, depths, width, trials, rng, variants=VARIANTS,
                        dtype=np.float64):
    """mu(X^(t)) per variant and depth, one fresh everything per trial."""
    values = {(v, t): np.empty(trials) for v in variants for t in depths}
    for trial in range(trials):
        child = rng.spawn(trial)
        x0 = child.normal((graph.n, width)).astype(dtype)
        topos, _, _ = _trial_topologies(graph, child, variants)
        adjs = {v: gnn.NormalizedAdjacency.from_graph(g) for v, g in topos.items()}
        for t in depths:
            if t == 0:
                for v in variants:
                    values[(v, t)][trial] = oversmoothing_metric(x0)
                continue
            model = gnn.glorot_init([width] * (t + 1), child, dropout=0.0, dtype=dtype)
            for v in variants:
                _, rep = _representation_forward(model, adjs[v], x0)
                values[(v, t)][trial] = oversmoothing_metric(rep)
    return [DiagnosticRun(v, t, values[(v, t)]) for v in variants for t in depths]


def _dense_sub_adjacency(graph, nodes, dtype):
    """Dense normalized adjacency of the induced subgraph, keeping the
    degree normalization of the parent graph."""
    if graph.n > _DENSE_CAP:
        raise SizeCapExceeded(f"dense influence path capped at n={_DENSE_CAP}")
    inv_sqrt = 1.0 / np.sqrt((graph.degrees + 1).astype(np.float64))
    remap = np.full(graph.n, -1, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes), dtype=np.int64)
    a = np.zeros((len(nodes), len(nodes)), dtype=np.float64)
    for li, u in enumerate(nodes):
        a[li, li] = inv_sqrt[u] * inv_sqrt[u]
        for w in graph.neighbors(u):
            lw = remap[w]
            if lw >= 0:
                a[li, lw] = inv_sqrt[u] * inv_sqrt[w]
    return a.astype(dtype)


def oversquashing_influence(model, graph, x, v, sources, mode="reverse"):
    """Sum over u in sources of the entrywise 1-norm of the Jacobian block
    of node v's final representation with respect to node u's input row.

    Exact for the given model and topology; influence flows only inside the
    t-hop ball of v, so computation is restricted there.
    """
    if model is None:  # zero layers: the Jacobian is the identity
        return float(x.shape[1]) if v in np.asarray(sources) else 0.0
    dtype = model.dtype
    x = np.ascontiguousarray(x, dtype=dtype)
    adj = gnn.NormalizedAdjacency.from_graph(graph)
    zs, _ = _representation_forward(model, adj, x)
    return _influence_on_primal(model, graph, zs, x.shape[1], v, sources, mode)


def _influence_on_primal(model, graph, zs, d_in, v, sources, mode="reverse"):
    t = model.num_layers
    dtype = model.dtype
    sources = np.asarray(sources, dtype=np.int64)
    ball = k_hop_neighborhood(graph, np.array([v], dtype=np.int64), t).nodes
    local = np.full(graph.n, -1, dtype=np.int64)
    local[ball] = np.arange(len(ball), dtype=np.int64)
    sub_a = _dense_sub_adjacency(graph, ball, dtype)
    sub_zs = [z[ball] for z in zs]
    src_local = local[sources[local[sources] >= 0]]
    if mode == "reverse":
        return _influence_reverse(model, sub_a, sub_zs, int(local[v]), src_local)
    if mode == "forward":
        return _influence_forward(model, sub_a, sub_zs, int(local[v]), src_local, d_in)
    raise ValueError(f"mode must be reverse or forward, got {mode!r}")


def _influence_reverse(model, sub_a, sub_zs, v, src_local):
    # one batched sweep: copy b tracks output coordinate b of node v
    nsub = sub_a.shape[0]
    d_out = model.dims[-1]
    dtype = model.dtype
    g = np.zeros((d_out, nsub, d_out), dtype=dtype)
    g[np.arange(d_out), v, np.arange(d_out)] = 1
    last = model.num_layers - 1
    for layer in range(last, -1, -1):
        if layer < last:
            g = g * (sub_zs[layer] > 0)
        g = sub_a @ (g @ model.weights[layer].T)
    if len(src_local) == 0:
        return 0.0
    return float(np.abs(g[:, src_local, :]).sum())


def _influence_forward(model, sub_a, sub_zs, v, src_local, d_in):
    total = 0.0
    dtype = model.dtype
    nsub = sub_a.shape[0]
    last = model.num_layers - 1
    for u in src_local:
        tan = np.zeros((d_in, nsub, d_in), dtype=dtype)
        tan[np.arange(d_in), u, np.arange(d_in)] = 1
        for layer, w in enumerate(model.weights):
            tan = (sub_a @ tan) @ w
            if layer < last:
                tan = tan * (sub_zs[layer] > 0)
        total += float(np.abs(tan[:, v, :]).sum())
    return total


def oversquashing_experiment(graph, depths, width, trials, rng, probes=20,
                             variants=VARIANTS, dtype=np.float64):
    """Mean influence per variant and depth.

    Per trial: fresh inputs, weights, tree and path; `probes` random probe
    nodes; the source set of a probe is its t-hop neighborhood on the RPG,
    reused verbatim for the rst and full variants.
    """
    values = {(v, t): np.empty(trials) for v in variants for t in depths}
    for trial in range(trials):
        child = rng.spawn(trial)
        x0 = child.normal((graph.n, width)).astype(dtype)
        topos, tree, path = _trial_topologies(graph, child, VARIANTS)
        probe_nodes = child.permutation(graph.n)[: min(probes, graph.n)]
        path_graph = topos["rpg"]
        for t in depths:
            if t == 0:  # identity Jacobian; the 0-hop source set is {v} itself
                for variant in variants:
                    values[(variant, t)][trial] = float(width)
                continue
            model = gnn.glorot_init([width] * (t + 1), child, dropout=0.0, dtype=dtype)
            source_sets = [
                k_hop_neighborhood(path_graph, np.array([v], dtype=np.int64), t).nodes
                for v in probe_nodes
            ]
            for variant in variants:
                topo = topos[variant]
                adj = gnn.NormalizedAdjacency.from_graph(topo)
                zs, _ = _representation_forward(model, adj, x0)
                per_probe = [
                    _influence_on_primal(model, topo, zs, width, int(v), src)
                    for v, src in zip(probe_nodes, source_sets)
                ]
                values[(variant, t)][trial] = float(np.mean(per_probe))
    return [DiagnosticRun(v, t, values[(v, t)]) for v in variants for t in depths]
