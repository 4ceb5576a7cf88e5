"""Dataset bundles on disk, split construction, and synthetic generators.

A bundle directory holds edges.tsv, features.tsv (or features.bin),
labels.tsv, and meta.txt.  Text files are TSV, UTF-8, LF, with '#' comments;
meta.txt is key=value lines carrying at least name, n, c, d0.  Binary
features: magic "GERNFEAT", u64 rows, u64 cols, then row-major little-endian
float32.
"""

import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    ClassTooSmall,
    CouldNotConnect,
    DisconnectedGraph,
    MissingFile,
    ParseError,
    ShapeMismatch,
)
from .graph import Graph, Split, build_graph

FEATURE_MAGIC = b"GERNFEAT"
_NOISE_STD = math.sqrt(0.1)


@dataclass
class DatasetBundle:
    name: str
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    meta: dict = field(default_factory=dict)
    splits: dict = field(default_factory=dict)

    def validate(self):
        n = self.graph.n
        if self.features.shape[0] != n:
            raise ShapeMismatch(f"{self.features.shape[0]} feature rows for {n} nodes")
        if self.labels.shape[0] != n:
            raise ShapeMismatch(f"{self.labels.shape[0]} labels for {n} nodes")
        if not np.isfinite(self.features).all():
            raise ShapeMismatch("features contain non-finite values")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise ShapeMismatch(f"labels outside [0, {self.num_classes})")
        return self


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def _read_meta(path):
    meta = {}
    for lineno, line in _data_lines(path):
        if "=" not in line:
            raise ParseError(path, lineno, "expected key=value")
        key, value = line.split("=", 1)
        meta[key.strip()] = value.strip()
    return meta


def _read_edges(path):
    pairs = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(path, lineno, f"expected 'u<TAB>v', got {line!r}")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(path, lineno, f"non-integer endpoint in {line!r}") from None
    return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)


def _read_labels(path):
    values = []
    for lineno, line in _data_lines(path):
        try:
            values.append(int(line))
        except ValueError:
            raise ParseError(path, lineno, f"non-integer label {line!r}") from None
    return np.asarray(values, dtype=np.int64)


def _read_features_text(path):
    rows = []
    width = -1
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if width < 0:
            width = len(parts)
        elif len(parts) != width:
            raise ParseError(path, lineno, f"expected {width} columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(path, lineno, "non-numeric feature value") from None
    return np.asarray(rows, dtype=np.float32)


def _read_features_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != FEATURE_MAGIC:
            raise ParseError(path, 0, f"bad magic {magic!r}")
        header = fh.read(16)
        if len(header) < 16:
            raise ParseError(path, 0, "truncated feature header")
        rows, cols = struct.unpack("<QQ", header)
        payload = fh.read(4 * rows * cols)
    if len(payload) != 4 * rows * cols:
        raise ParseError(path, 0, "truncated feature payload")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float32)


def load_bundle(directory, largest_component=False):
    """Read and validate a bundle; directed duplicate edges merge, self-loops
    drop (counts on the graph).  With largest_component=True a disconnected
    graph is cut down to its giant component instead of raising."""
    def need(name, *alternatives):
        for candidate in (name, *alternatives):
            path = os.path.join(directory, candidate)
            if os.path.exists(path):
                return path
        raise MissingFile(f"{os.path.join(directory, name)} not found")

    meta = _read_meta(need("meta.txt"))
    try:
        n = int(meta["n"])
        c = int(meta["c"])
    except KeyError as exc:
        raise ParseError(os.path.join(directory, "meta.txt"), 0, f"missing key {exc}") from None
    edges = _read_edges(need("edges.tsv"))
    feat_path = need("features.bin", "features.tsv")
    if feat_path.endswith(".bin"):
        features = _read_features_binary(feat_path)
    else:
        features = _read_features_text(feat_path)
    labels = _read_labels(need("labels.tsv"))

    keep = None
    try:
        graph = build_graph(n, edges)
    except DisconnectedGraph:
        if not largest_component:
            raise
        g_all = build_graph(n, edges, require_connected=False)
        comp, count = _kernels.component_labels(g_all.indptr, g_all.indices)
        comp = np.asarray(comp)
        giant = np.argmax(np.bincount(comp, minlength=count))
        keep = np.flatnonzero(comp == giant).astype(np.int64)
        remap = np.full(n, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep), dtype=np.int64)
        sub_edges = remap[g_all.edges]
        sub_edges = sub_edges[(sub_edges >= 0).all(axis=1)]
        graph = build_graph(len(keep), sub_edges)
        features = features[keep]
        labels = labels[keep]
        meta["largest_component_of"] = str(n)

    bundle = DatasetBundle(
        name=meta.get("name", os.path.basename(os.path.normpath(directory))),
        graph=graph,
        features=features,
        labels=labels,
        num_classes=c,
        meta=meta,
    )
    return bundle.validate()


def save_bundle(bundle, directory, binary_features=False):
    """Write the four bundle files; loading them back reproduces the bundle
    exactly (text features carry 9 significant digits, enough for float32)."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "meta.txt"), "w", encoding="utf-8") as fh:
        meta = dict(bundle.meta)
        meta.update(
            name=bundle.name,
            n=bundle.graph.n,
            c=bundle.num_classes,
            d0=bundle.features.shape[1],
        )
        for key in sorted(meta):
            fh.write(f"{key}={meta[key]}\n")
    with open(os.path.join(directory, "edges.tsv"), "w", encoding="utf-8") as fh:
        for u, v in bundle.graph.edges:
            fh.write(f"{u}\t{v}\n")
    with open(os.path.join(directory, "labels.tsv"), "w", encoding="utf-8") as fh:
        for y in bundle.labels:
            fh.write(f"{y}\n")
    if binary_features:
        feats = np.ascontiguousarray(bundle.features, dtype="<f4")
        with open(os.path.join(directory, "features.bin"), "wb") as fh:
            fh.write(FEATURE_MAGIC)
            fh.write(struct.pack("<QQ", *feats.shape))
            fh.write(feats.tobytes())
    else:
        with open(os.path.join(directory, "features.tsv"), "w", encoding="utf-8") as fh:
            for row in bundle.features:
                fh.write("\t".join(f"{v:.9g}" for v in row) + "\n")


def make_split(labels, rng, per_class=None, fraction=None, val_size=None):
    """Planetoid-style split: train by per-class count or uniform fraction,
    validation from the remainder (default min(500, 25% of it)), test = rest."""
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if (per_class is None) == (fraction is None):
        raise ValueError("specify exactly one of per_class or fraction")
    if per_class is not None:
        train_parts = []
        for cls in range(int(labels.max()) + 1):
            members = np.flatnonzero(labels == cls)
            if len(members) < per_class:
                raise ClassTooSmall(cls, len(members), per_class)
            pick = rng.permutation(len(members))[:per_class]
            train_parts.append(members[pick])
        train = np.sort(np.concatenate(train_parts))
    else:
        if not 0.0 < fraction < 1.0:
            raise ValueError(f"fraction must be in (0,1), got {fraction}")
        count = int(round(fraction * n))
        train = np.sort(rng.permutation(n)[:count])
    rest = np.setdiff1d(np.arange(n, dtype=np.int64), train)
    rest = rest[rng.permutation(len(rest))]
    if val_size is None:
        n_val = min(500, len(rest) // 4)
    elif isinstance(val_size, float) and val_size < 1.0:
        n_val = int(round(val_size * len(rest)))
    else:
        n_val = int(val_size)
    n_val = min(n_val, len(rest))
    val = np.sort(rest[:n_val])
    test = np.sort(rest[n_val:])
    return Split(train, val, test)


def _class_features(labels, num_classes, rng, noise_std=_NOISE_STD):
    x = np.zeros((len(labels), num_classes), dtype=np.float32)
    x[np.arange(len(labels)), labels] = 1.0
    return x + noise_std * rng.normal((len(labels), num_classes)).astype(np.float32)


def synth_clique_chain(cliques, clique_size, rng, noise_std=_NOISE_STD):
    """Chain of K_s cliques joined by single bridge edges, one class per
    clique.  Every bridge has effective resistance 1, so the resistance-
    weighted cut-size equals cliques - 1 exactly."""
    if cliques < 1 or clique_size < 2:
        raise ValueError("need cliques >= 1 and clique_size >= 2")
    n = cliques * clique_size
    edges = []
    for b in range(cliques):
        base = b * clique_size
        for i in range(clique_size):
            for j in range(i + 1, clique_size):
                edges.append((base + i, base + j))
        if b + 1 < cliques:
            edges.append((base + clique_size - 1, base + clique_size))
    labels = np.repeat(np.arange(cliques, dtype=np.int64), clique_size)
    graph = build_graph(n, np.asarray(edges, dtype=np.int64))
    bundle = DatasetBundle(
        name=f"clique_chain_{cliques}x{clique_size}",
        graph=graph,
        features=_class_features(labels, cliques, rng, noise_std),
        labels=labels,
        num_classes=cliques,
        meta={"generator": "clique_chain", "cliques": str(cliques),
              "clique_size": str(clique_size)},
    )
    return bundle.validate()


def _bernoulli_indices(npairs, p, rng):
    """Indices of successes in npairs iid Bernoulli(p) draws, by exact
    geometric skip sampling (O(successes) work)."""
    if npairs <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(npairs, dtype=np.int64)
    log_q = math.log1p(-p)
    chunks = []
    pos = 0
    while pos < npairs:
        want = max(64, int((npairs - pos) * p * 1.3) + 64)
        u = rng.random(want)
        gaps = np.floor(np.log1p(-u) / log_q).astype(np.int64) + 1
        hits = pos - 1 + np.cumsum(gaps)
        inside = hits[hits < npairs]
        chunks.append(inside)
        if len(inside) < len(hits):
            break
        pos = int(hits[-1]) + 1
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def sbm_edges(sizes, p_in, p_out, rng):
    """Edge list of one stochastic-block-model draw (may be disconnected)."""
    sizes = list(sizes)
    offsets = np.cumsum([0] + sizes)
    parts = []
    for a, sa in enumerate(sizes):
        iu, ju = np.triu_indices(sa, 1)
        sel = _bernoulli_indices(len(iu), p_in, rng)
        if len(sel):
            parts.append(np.stack([offsets[a] + iu[sel], offsets[a] + ju[sel]], axis=1))
        for b in range(a + 1, len(sizes)):
            sb = sizes[b]
            sel = _bernoulli_indices(sa * sb, p_out, rng)
            if len(sel):
                parts.append(np.stack(
                    [offsets[a] + sel // sb, offsets[b] + sel % sb], axis=1))
    if not parts:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(parts, axis=0)


def synth_sbm(blocks, block_size, p_in, p_out, rng, noise_std=_NOISE_STD,
              max_attempts=20):
    """Stochastic block model with block-id labels; redraws until connected."""
    if not (0.0 <= p_in <= 1.0 and 0.0 <= p_out <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    n = blocks * block_size
    sizes = [block_size] * blocks
    for attempt in range(max_attempts):
        child = rng.spawn(attempt)
        edges = sbm_edges(sizes, p_in, p_out, child)
        graph = build_graph(n, edges, require_connected=False)
        if graph.is_connected():
            break
    else:
        raise CouldNotConnect(
            f"no connected SBM draw in {max_attempts} attempts "
            f"(blocks={blocks}, size={block_size}, p_in={p_in}, p_out={p_out})"
        )
    labels = np.repeat(np.arange(blocks, dtype=np.int64), block_size)
    bundle = DatasetBundle(
        name=f"sbm_{blocks}x{block_size}",
        graph=graph,
        features=_class_features(labels, blocks, rng, noise_std),
        labels=labels,
        num_classes=blocks,
        meta={"generator": "sbm", "blocks": str(blocks),
              "block_size": str(block_size), "p_in": str(p_in), "p_out": str(p_out)},
    )
    return bundle.validate()


def row_normalize(features):
    """Scale each row to unit L1 mass; zero rows stay zero."""
    features = np.asarray(features, dtype=np.float32)
    sums = np.abs(features).sum(axis=1, keepdims=True)
    sums[sums == 0.0] = 1.0
    return features / sums
