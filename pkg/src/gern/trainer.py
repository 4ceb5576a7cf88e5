"""The GERN training loop: cycle over a pool of random path graphs, train on
the k-hop neighborhood of the labeled nodes within the epoch's path, validate
on the full graph, piecewise-constant learning-rate schedule."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import gnn, linearize, spanning
from .errors import EmptySubset, NonFiniteLoss
from .graph import Graph, k_hop_neighborhood
from .rng import RngStream

TRAIN_MODES = ("rpg", "rst", "full")


@dataclass
class TrainConfig:
    z: int = 1000  # maximal number of epochs
    k: int = 2  # GCN layers; also the hop radius of the training restriction
    hidden: int = 16
    pool_size: int = 50
    beta: float = 0.5
    generator: str = "a_rst"
    lr0: float = 1e-2
    weight_decay: float = 5e-4
    lr_decay_factor: float = 10.0**-0.5
    patience: int = 100
    lr_min: float = 1e-4
    max_steps_per_lr: int = 1000
    dropout: float = 0.5
    seed: int = 0
    val_every: int = 1
    mode: str = "rpg"  # rpg | rst (train on the tree itself) | full (no sparsification)

    def validate(self):
        if self.z < 1:
            raise ValueError("z must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.pool_size < 1:
            raise ValueError("pool_size must be >= 1")
        if not 0.0 < self.lr_min < self.lr0:
            raise ValueError("need 0 < lr_min < lr0")
        if self.mode not in TRAIN_MODES:
            raise ValueError(f"mode must be one of {TRAIN_MODES}")
        if self.generator not in spanning.GENERATORS:
            raise ValueError(f"generator must be one of {spanning.GENERATORS}")
        return self


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    lr: float
    pool_index: int
    wall_time: float
    train_edges: int


@dataclass
class TrainHistory:
    records: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_accuracy: float = -1.0

    def append(self, rec):
        self.records.append(rec)

    @property
    def epochs_run(self):
        return len(self.records)


@dataclass
class LrDecision:
    lr: float
    stop: bool


def lr_schedule_step(history, current_lr, patience=100, lr_decay_factor=10.0**-0.5,
                     lr_min=1e-4, max_steps_per_lr=1000):
    """Piecewise-constant schedule over the validation-accuracy history.

    Decay when the accuracy has not improved for `patience` consecutive
    epochs at the current rate, or when the rate has been active for
    `max_steps_per_lr` epochs.  Stop once the next rate would fall below
    lr_min.
    """
    records = history.records
    t = len(records) - 1
    if t < 0:
        return LrDecision(current_lr, False)
    seg_start = t
    while seg_start > 0 and records[seg_start - 1].lr == current_lr:
        seg_start -= 1
    best = -math.inf
    last_improve = seg_start
    for i, rec in enumerate(records):
        if rec.val_accuracy > best:
            best = rec.val_accuracy
            last_improve = i
    anchor = max(last_improve, seg_start)
    stale = t - anchor
    seg_len = t - seg_start + 1
    if stale < patience and seg_len < max_steps_per_lr:
        return LrDecision(current_lr, False)
    candidate = current_lr * lr_decay_factor
    if candidate < lr_min * (1.0 - 1e-9):
        return LrDecision(current_lr, True)
    return LrDecision(candidate, False)


def generate_rpg_pool(graph, count, beta, rng, generator="a_rst"):
    """Independent (tree -> DFS path) draws; entry i uses the child stream
    rng.spawn(i), so the pool is identical however the work is scheduled."""
    if count < 1:
        raise ValueError("pool size must be >= 1")
    paths = []
    for i in range(count):
        child = rng.spawn(i)
        tree = spanning.sample_tree(graph, child, method=generator, beta=beta)
        paths.append(linearize.dfs_linearize(tree, child))
    return paths


@dataclass
class _TrainContext:
    adj: gnn.NormalizedAdjacency
    x: np.ndarray
    y: np.ndarray
    train_local: np.ndarray
    train_edges: int
    subgraph: object = None  # Subgraph for restricted modes, None for full


def _restricted_context(base_graph, x, y, train_nodes, k):
    sub = k_hop_neighborhood(base_graph, train_nodes, k)
    adj = gnn.NormalizedAdjacency.from_graph(sub.graph)
    return _TrainContext(
        adj=adj,
        x=np.ascontiguousarray(x[sub.nodes]),
        y=y[sub.nodes],
        train_local=sub.to_local(train_nodes),
        train_edges=sub.graph.m,
        subgraph=sub,
    )


def training_step(model, adam, ctx, rng, lr, weight_decay):
    """One optimization step: dropout forward, loss on the labeled nodes,
    backprop, Adam update.  Returns the training loss."""
    log_probs, cache = gnn.gcn_forward(model, ctx.adj, ctx.x, training=True,
                                       rng=rng, want_cache=True)
    loss = gnn.cross_entropy_loss(log_probs, ctx.y, ctx.train_local)
    grads = gnn.gcn_backward(model, ctx.adj, cache, ctx.y, ctx.train_local)
    gnn.adam_step(model, grads, adam, lr, weight_decay)
    return loss


@dataclass
class TrainResult:
    model: gnn.GCNModel
    history: TrainHistory
    pool_trees: list
    pool_paths: list
    contexts: list


def train_gern(graph, x, y, split, cfg):
    """Train a GCN per the pool-of-path-graphs procedure; returns the weight
    snapshot from the epoch with the highest validation accuracy."""
    cfg.validate()
    split.validate_for(graph.n)
    if split.val.size == 0:
        raise EmptySubset("training needs a validation set for the schedule")
    y = np.asarray(y, dtype=np.int64)
    num_classes = int(y.max()) + 1
    x = np.ascontiguousarray(x, dtype=np.float32)

    init_rng = RngStream(cfg.seed, 1)
    train_rng = RngStream(cfg.seed, 2)
    pool_rng = RngStream(cfg.seed, 3)

    dims = [x.shape[1]] + [cfg.hidden] * (cfg.k - 1) + [num_classes]
    model = gnn.glorot_init(dims, init_rng, cfg.dropout)
    adam = gnn.AdamState(model)
    full_adj = gnn.NormalizedAdjacency.from_graph(graph)

    pool_trees, pool_paths, contexts = [], [], []
    if cfg.mode == "full":
        contexts.append(_TrainContext(
            adj=full_adj, x=x, y=y, train_local=split.train,
            train_edges=graph.m, subgraph=None,
        ))
    else:
        for i in range(cfg.pool_size):
            child = pool_rng.spawn(i)
            tree = spanning.sample_tree(graph, child, method=cfg.generator, beta=cfg.beta)
            pool_trees.append(tree)
            if cfg.mode == "rpg":
                path = linearize.dfs_linearize(tree, child)
                pool_paths.append(path)
                base = path.as_graph()
            else:
                base = Graph(tree.n, tree.edges)
            contexts.append(_restricted_context(base, x, y, split.train, cfg.k))

    history = TrainHistory()
    best_model = model.copy()
    lr = cfg.lr0
    for epoch in range(cfg.z):
        pool_index = epoch % len(contexts)
        ctx = contexts[pool_index]
        t0 = time.perf_counter()
        train_loss = training_step(model, adam, ctx, train_rng, lr, cfg.weight_decay)
        if not math.isfinite(train_loss):
            raise NonFiniteLoss(epoch)
        val_loss = math.nan
        val_acc = math.nan
        if epoch % cfg.val_every == 0 or epoch == cfg.z - 1:
            log_probs, _ = gnn.gcn_forward(model, full_adj, x, training=False)
            val_loss = gnn.cross_entropy_loss(log_probs, y, split.val)
            val_acc = gnn.accuracy(log_probs, y, split.val)
            if val_acc > history.best_val_accuracy:
                history.best_val_accuracy = val_acc
                history.best_epoch = epoch
                best_model = model.copy()
        history.append(EpochRecord(
            epoch=epoch, train_loss=train_loss, val_loss=val_loss,
            val_accuracy=val_acc, lr=lr, pool_index=pool_index,
            wall_time=time.perf_counter() - t0, train_edges=ctx.train_edges,
        ))
        decision = lr_schedule_step(
            history, lr, patience=cfg.patience, lr_decay_factor=cfg.lr_decay_factor,
            lr_min=cfg.lr_min, max_steps_per_lr=cfg.max_steps_per_lr,
        )
        if decision.stop:
            break
        lr = decision.lr

    return TrainResult(model=best_model, history=history, pool_trees=pool_trees,
                       pool_paths=pool_paths, contexts=contexts)


def evaluate(model, graph_or_adj, x, y, subset, block_size=None):
    """Accuracy of the model on a node subset, full-graph inference mode.

    Always runs the block-structured forward (one whole-graph block when
    block_size is None), whose output is independent of the blocking.
    """
    adj = graph_or_adj
    if not isinstance(adj, gnn.NormalizedAdjacency):
        adj = gnn.NormalizedAdjacency.from_graph(graph_or_adj)
    x = np.ascontiguousarray(x, dtype=model.dtype)
    log_probs = gnn.gcn_forward_blockwise(model, adj, x, block_size or adj.n)
    return gnn.accuracy(log_probs, y, subset)
