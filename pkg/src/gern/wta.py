"""Sequential 1-nearest-revealed-neighbor prediction on a linearized path.

At each step a node is presented, its label predicted from the closest
already-revealed node along the path (earlier-revealed wins ties), then the
true label is revealed.  Expected mistakes scale with the resistance-weighted
cut-size times log n when the path comes from a uniform RST.
"""

import bisect
from dataclasses import dataclass

import numpy as np

from . import linearize, spanning, stats
from .errors import LengthMismatch


@dataclass
class GameTranscript:
    order: np.ndarray  # presentation order over nodes
    predictions: np.ndarray
    truths: np.ndarray
    mistake_flags: np.ndarray

    @property
    def mistakes(self):
        return int(self.mistake_flags.sum())


def wta_play(path, labels, order, default_label=0):
    """Run the game on a fixed presentation order; returns the transcript.

    The first step has nothing revealed and predicts default_label (counted
    as a mistake if wrong).
    """
    labels = np.asarray(labels)
    n = path.n
    if labels.shape[0] != n:
        raise LengthMismatch(f"{labels.shape[0]} labels for {n} nodes")
    order = np.asarray(order, dtype=np.int64)
    if len(order) != n or len(np.unique(order)) != n:
        raise ValueError("presentation order must be a permutation of the nodes")
    pos = path.positions
    label_at = labels[path.order]  # label by path position
    revealed = []  # sorted path positions
    reveal_time = np.full(n, -1, dtype=np.int64)  # by path position
    preds = np.empty(n, dtype=labels.dtype)
    truths = labels[order]
    for t, node in enumerate(order):
        p = int(pos[node])
        if t == 0:
            preds[t] = default_label
        else:
            i = bisect.bisect_left(revealed, p)
            best = None
            for q in ([revealed[i - 1]] if i > 0 else []) + (
                [revealed[i]] if i < len(revealed) else []
            ):
                key = (abs(q - p), reveal_time[q])
                if best is None or key < best[0]:
                    best = (key, q)
            preds[t] = label_at[best[1]]
        bisect.insort(revealed, p)
        reveal_time[p] = t
    return GameTranscript(order, preds, truths, preds != truths)


def wta_expected_mistakes(graph, labels, trials, rng, order_mode="random",
                          default_label=0):
    """Mean and stderr of mistakes over trials.

    Each trial draws a fresh uniform RST (wilson), linearizes it, and plays
    with a fresh uniformly random presentation order.  order_mode
    "adversarial-stub" is a documented placeholder and behaves as "random";
    genuinely adversarial orders are out of scope.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if order_mode not in ("random", "adversarial-stub"):
        raise ValueError(f"unknown order_mode {order_mode!r}")
    counts = np.empty(trials, dtype=np.float64)
    for trial in range(trials):
        child = rng.spawn(trial)
        tree = spanning.wilson(graph, child)
        path = linearize.dfs_linearize(tree, child)
        order = child.permutation(graph.n)
        counts[trial] = wta_play(path, labels, order, default_label).mistakes
    mean, stderr = stats.mean_stderr(counts)
    return {"mean": mean, "stderr": stderr, "per_trial": counts}
