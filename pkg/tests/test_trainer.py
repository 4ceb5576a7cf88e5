"""Trainer tests: schedule arithmetic, pool cycling, the edge-access audit,
determinism, and the non-finite-loss guard."""

import math

import numpy as np
import pytest

import gern
from gern.trainer import (
    EpochRecord,
    TrainConfig,
    TrainHistory,
    evaluate,
    lr_schedule_step,
    train_gern,
)


def _record(epoch, acc, lr):
    return EpochRecord(epoch=epoch, train_loss=1.0, val_loss=1.0,
                       val_accuracy=acc, lr=lr, pool_index=0,
                       wall_time=0.0, train_edges=0)


def _history(accs, lrs):
    h = TrainHistory()
    for i, (a, lr) in enumerate(zip(accs, lrs)):
        h.append(_record(i, a, lr))
    return h


FACTOR = 10.0 ** -0.5


class TestLrSchedule:
    def test_empty_history_keeps_rate(self):
        d = lr_schedule_step(TrainHistory(), 0.01, patience=3)
        assert d.lr == 0.01 and not d.stop

    def test_improving_run_keeps_rate(self):
        h = _history([0.1, 0.2, 0.3, 0.4], [0.01] * 4)
        d = lr_schedule_step(h, 0.01, patience=3, lr_decay_factor=FACTOR)
        assert d.lr == 0.01 and not d.stop

    def test_stale_run_decays(self):
        # best at epoch 0, then flat for patience epochs
        h = _history([0.5, 0.5, 0.5, 0.5], [0.01] * 4)
        d = lr_schedule_step(h, 0.01, patience=3, lr_decay_factor=FACTOR)
        assert d.lr == pytest.approx(0.01 * FACTOR) and not d.stop

    def test_one_short_of_patience_keeps_rate(self):
        h = _history([0.5, 0.5, 0.5], [0.01] * 3)
        d = lr_schedule_step(h, 0.01, patience=3, lr_decay_factor=FACTOR)
        assert d.lr == 0.01 and not d.stop

    def test_max_steps_forces_decay_even_while_improving(self):
        h = _history([0.1, 0.2, 0.3, 0.4, 0.5], [0.01] * 5)
        d = lr_schedule_step(h, 0.01, patience=100, lr_decay_factor=FACTOR,
                             max_steps_per_lr=5)
        assert d.lr == pytest.approx(0.01 * FACTOR)

    def test_staleness_anchored_to_segment_start(self):
        # the global best predates the current lr segment; the counter must
        # restart at the segment boundary, not fire immediately after decay
        accs = [0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.5, 0.5]
        lrs = [0.01] * 6 + [0.01 * FACTOR] * 2
        d = lr_schedule_step(_history(accs, lrs), 0.01 * FACTOR, patience=3,
                             lr_decay_factor=FACTOR)
        assert d.lr == pytest.approx(0.01 * FACTOR) and not d.stop

    def test_stop_when_next_rate_below_floor(self):
        h = _history([0.5] * 4, [1.2e-4] * 4)
        d = lr_schedule_step(h, 1.2e-4, patience=3, lr_decay_factor=FACTOR,
                             lr_min=1e-4)
        assert d.stop and d.lr == 1.2e-4

    def test_decay_exactly_to_floor_is_allowed(self):
        lr = 1e-4 / FACTOR
        h = _history([0.5] * 4, [lr] * 4)
        d = lr_schedule_step(h, lr, patience=3, lr_decay_factor=FACTOR,
                             lr_min=1e-4)
        assert not d.stop
        assert d.lr == pytest.approx(1e-4, rel=1e-9)


@pytest.fixture(scope="module")
def chain_problem(chain_bundle):
    g, x, y = chain_bundle.graph, chain_bundle.features, chain_bundle.labels
    train = np.array([0, 3, 6], dtype=np.int64)
    val = np.array([1, 4, 7], dtype=np.int64)
    test = np.array([2, 5, 8], dtype=np.int64)
    return g, x, y, gern.Split(train, val, test)


def test_pool_cycling_and_restricted_edges(chain_problem):
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=10, k=2, hidden=8, pool_size=4, seed=3)
    res = train_gern(g, x, y, split, cfg)
    assert [r.pool_index for r in res.history.records] == [0, 1, 2, 3, 0, 1, 2, 3, 0, 1]
    assert len(res.pool_trees) == len(res.pool_paths) == len(res.contexts) == 4
    for rec in res.history.records:
        assert rec.train_edges <= g.n - 1
        assert rec.train_edges == res.contexts[rec.pool_index].train_edges


def test_contexts_never_leave_the_path(chain_problem):
    # the audit behind the whole construction: every edge the training
    # forward can touch is an edge of that epoch's path graph
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=6, k=2, hidden=8, pool_size=6, seed=9)
    res = train_gern(g, x, y, split, cfg)
    full_edges = {frozenset(e) for e in g.edges.tolist()}
    saw_restriction = False
    for path, ctx in zip(res.pool_paths, res.contexts):
        path_edges = {frozenset(e) for e in path.as_graph().edges.tolist()}
        sub = ctx.subgraph
        ctx_edges = {frozenset(sub.nodes[e].tolist())
                     for e in sub.graph.edges.tolist()}
        assert ctx_edges <= path_edges
        if not ctx_edges <= full_edges:
            saw_restriction = True
    # jump edges exist, so at least one pool entry trains across a non-edge
    assert saw_restriction


def test_rst_mode_contexts_stay_inside_graph(chain_problem):
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=4, k=2, hidden=8, pool_size=4, seed=9, mode="rst")
    res = train_gern(g, x, y, split, cfg)
    assert res.pool_paths == []
    full_edges = {frozenset(e) for e in g.edges.tolist()}
    for tree, ctx in zip(res.pool_trees, res.contexts):
        sub = ctx.subgraph
        ctx_edges = {frozenset(sub.nodes[e].tolist())
                     for e in sub.graph.edges.tolist()}
        assert ctx_edges <= {frozenset(e) for e in tree.edges.tolist()}
        assert ctx_edges <= full_edges


def test_full_mode_single_context(chain_problem):
    g, x, y, split = chain_problem
    res = train_gern(g, x, y, split, TrainConfig(z=5, k=2, hidden=8, seed=1, mode="full"))
    assert len(res.contexts) == 1
    assert res.pool_trees == [] and res.pool_paths == []
    assert all(r.pool_index == 0 for r in res.history.records)
    assert all(r.train_edges == g.m for r in res.history.records)


def test_best_snapshot_is_earliest_maximum(chain_problem):
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=40, k=2, hidden=8, pool_size=5, seed=7)
    res = train_gern(g, x, y, split, cfg)
    h = res.history
    validated = [r for r in h.records if not math.isnan(r.val_accuracy)]
    best = max(r.val_accuracy for r in validated)
    first = next(r.epoch for r in validated if r.val_accuracy == best)
    assert h.best_val_accuracy == best
    assert h.best_epoch == first
    # the returned model reproduces the recorded best accuracy
    assert evaluate(res.model, g, x, y, split.val) == pytest.approx(best)


def test_val_every_skips_epochs(chain_problem):
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=7, k=2, hidden=8, pool_size=3, seed=2, val_every=3)
    res = train_gern(g, x, y, split, cfg)
    for r in res.history.records:
        expect_val = r.epoch % 3 == 0 or r.epoch == 6
        assert math.isnan(r.val_accuracy) != expect_val


def test_training_is_deterministic(chain_problem):
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=12, k=2, hidden=8, pool_size=4, seed=11)
    a = train_gern(g, x, y, split, cfg)
    b = train_gern(g, x, y, split, cfg)
    assert [r.val_accuracy for r in a.history.records] == \
           [r.val_accuracy for r in b.history.records]
    for wa, wb in zip(a.model.weights, b.model.weights):
        assert np.array_equal(wa, wb)


def test_non_finite_loss_raises(chain_problem, monkeypatch):
    g, x, y, split = chain_problem
    monkeypatch.setattr("gern.trainer.training_step",
                        lambda *a, **k: float("nan"))
    with pytest.raises(gern.NonFiniteLoss):
        train_gern(g, x, y, split, TrainConfig(z=3, k=2, hidden=8, seed=0))


def test_empty_validation_rejected(chain_problem):
    g, x, y, split = chain_problem
    bad = gern.Split(split.train, np.array([], dtype=np.int64), split.test)
    with pytest.raises(gern.EmptySubset):
        train_gern(g, x, y, bad, TrainConfig(z=2, k=2, hidden=8))


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(z=0).validate()
    with pytest.raises(ValueError):
        TrainConfig(mode="walk").validate()
    with pytest.raises(ValueError):
        TrainConfig(generator="kruskal").validate()
    with pytest.raises(ValueError):
        TrainConfig(lr0=1e-5, lr_min=1e-4).validate()


def test_evaluate_block_size_irrelevant(chain_problem):
    g, x, y, split = chain_problem
    cfg = TrainConfig(z=8, k=2, hidden=8, pool_size=4, seed=13)
    res = train_gern(g, x, y, split, cfg)
    whole = evaluate(res.model, g, x, y, split.test)
    for bs in (1, 2, g.n):
        assert evaluate(res.model, g, x, y, split.test, block_size=bs) == whole
