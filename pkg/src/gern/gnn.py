"""From-scratch dense-weight GCN on a sparse normalized adjacency.

Forward rule per layer: X' = act(A_hat @ dropout(X) @ W), where A_hat is the
symmetrically normalized adjacency with self-loops (degree convention
d_hat = deg + 1), activation ReLU on hidden layers and log-softmax on the
last.  Training arithmetic is float32; float64 exists for gradient checks.
"""

import struct

import numpy as np

from . import _kernels
from .errors import (
    EmptySubset,
    InvalidDims,
    NonFiniteActivation,
    ParseError,
    ShapeMismatch,
    StaleCache,
)

CHECKPOINT_MAGIC = b"GERNGCN1"


class NormalizedAdjacency:
    """CSR of A + I with weights 1/sqrt(d_hat_i * d_hat_j)."""

    __slots__ = ("n", "indptr", "indices", "_weights")

    def __init__(self, n, indptr, indices, weights64):
        self.n = n
        self.indptr = indptr
        self.indices = indices
        self._weights = {np.dtype(np.float64): weights64}

    @classmethod
    def from_graph(cls, graph):
        n = graph.n
        e = graph.edges
        loops = np.arange(n, dtype=np.int64)
        src = np.concatenate([e[:, 0], e[:, 1], loops])
        dst = np.concatenate([e[:, 1], e[:, 0], loops])
        order = np.lexsort((dst, src))
        indices = np.ascontiguousarray(dst[order])
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        inv_sqrt = 1.0 / np.sqrt((graph.degrees + 1).astype(np.float64))
        weights = np.ascontiguousarray((inv_sqrt[src] * inv_sqrt[dst])[order])
        return cls(n, indptr, indices, weights)

    def weights(self, dtype):
        dtype = np.dtype(dtype)
        if dtype not in self._weights:
            self._weights[dtype] = self._weights[np.dtype(np.float64)].astype(dtype)
        return self._weights[dtype]

    def matmul(self, x, out=None, r0=0, r1=None):
        """out[r0:r1] = (A_hat @ x)[r0:r1]; rows outside the range untouched."""
        if r1 is None:
            r1 = self.n
        if out is None:
            out = np.empty((self.n, x.shape[1]), dtype=x.dtype)
        _kernels.spmm_rows(
            self.indptr, self.indices, self.weights(x.dtype), x, out, r0, r1
        )
        return out


class GCNModel:
    """Stack of dense weight matrices; dims[0] inputs, dims[-1] classes."""

    __slots__ = ("weights", "dropout", "version")

    def __init__(self, weights, dropout=0.5):
        self.weights = weights
        self.dropout = float(dropout)
        self.version = 0

    @property
    def dims(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def num_layers(self):
        return len(self.weights)

    @property
    def dtype(self):
        return self.weights[0].dtype

    def astype(self, dtype):
        m = GCNModel([w.astype(dtype) for w in self.weights], self.dropout)
        m.version = self.version
        return m

    def copy(self):
        return self.astype(self.dtype)

    def save(self, path):
        dims = self.dims
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<IIId", 1, self.num_layers, len(dims), self.dropout))
            fh.write(struct.pack(f"<{len(dims)}Q", *dims))
            for w in self.weights:
                fh.write(np.ascontiguousarray(w, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != CHECKPOINT_MAGIC:
                raise ParseError(path, 0, f"not a model checkpoint (magic {magic!r})")
            header = fh.read(20)
            if len(header) < 20:
                raise ParseError(path, 0, "truncated checkpoint header")
            version, k, ndims, dropout = struct.unpack("<IIId", header)
            if version != 1:
                raise ParseError(path, 0, f"unsupported checkpoint version {version}")
            dims = struct.unpack(f"<{ndims}Q", fh.read(8 * ndims))
            weights = []
            for i in range(k):
                need = 4 * dims[i] * dims[i + 1]
                raw = fh.read(need)
                if len(raw) < need:
                    raise ParseError(path, 0, f"truncated weights for layer {i}")
                w = np.frombuffer(raw, dtype="<f4").reshape(dims[i], dims[i + 1])
                weights.append(w.astype(np.float32))
        return cls(weights, dropout)


def glorot_init(dims, rng, dropout=0.5, dtype=np.float32):
    """Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out))."""
    if len(dims) < 2 or any(int(d) <= 0 for d in dims):
        raise InvalidDims(f"need >= 2 positive layer sizes, got {dims}")
    weights = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-a, a, (fan_in, fan_out)).astype(dtype))
    return GCNModel(weights, dropout)


def _log_softmax(z):
    m = z.max(axis=1, keepdims=True)
    shifted = z - m
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return shifted - lse


class ForwardCache:
    __slots__ = ("aggs", "masks", "zs", "log_probs", "version")

    def __init__(self, aggs, masks, zs, log_probs, version):
        self.aggs = aggs
        self.masks = masks
        self.zs = zs
        self.log_probs = log_probs
        self.version = version


def gcn_forward(model, adj, x, training=False, rng=None, want_cache=False):
    """Log-probabilities over classes for every node.

    Dropout (inverted scaling, on every layer input) runs only when training;
    training mode requires an rng.  Returns (log_probs, cache or None).
    """
    if x.shape[0] != adj.n:
        raise ShapeMismatch(f"{x.shape[0]} feature rows for {adj.n} nodes")
    if x.shape[1] != model.dims[0]:
        raise ShapeMismatch(f"feature dim {x.shape[1]}, model expects {model.dims[0]}")
    if training and model.dropout > 0.0 and rng is None:
        raise ValueError("training-mode forward with dropout needs an rng")
    dtype = model.dtype
    h = np.ascontiguousarray(x, dtype=dtype)
    aggs, masks, zs = [], [], []
    last = model.num_layers - 1
    for layer, w in enumerate(model.weights):
        mask = None
        if training and model.dropout > 0.0:
            keep = dtype.type(1.0 - model.dropout)
            mask = (rng.random(h.shape) < keep).astype(dtype) / keep
            h = h * mask
        agg = adj.matmul(h)
        z = agg @ w
        if not np.isfinite(z).all():
            raise NonFiniteActivation(f"non-finite values after layer {layer}")
        if want_cache:
            aggs.append(agg)
            masks.append(mask)
            zs.append(z)
        h = np.maximum(z, 0) if layer < last else _log_softmax(z)
    cache = ForwardCache(aggs, masks, zs, h, model.version) if want_cache else None
    return h, cache


def cross_entropy_loss(log_probs, labels, subset):
    """Mean negative log-likelihood over the subset."""
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise EmptySubset("loss needs a non-empty node subset")
    return float(-log_probs[subset, np.asarray(labels)[subset]].mean())


def gcn_backward(model, adj, cache, labels, subset):
    """Gradients of the subset-mean cross-entropy w.r.t. every weight matrix."""
    if cache.version != model.version:
        raise StaleCache("forward cache predates the latest weight update")
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise EmptySubset("backward needs a non-empty node subset")
    labels = np.asarray(labels)
    dtype = model.dtype
    probs = np.exp(cache.log_probs[subset])
    g = np.zeros_like(cache.log_probs)
    g[subset] = probs
    g[subset, labels[subset]] -= dtype.type(1.0)
    g[subset] /= dtype.type(subset.size)
    grads = [None] * model.num_layers
    for layer in range(model.num_layers - 1, -1, -1):
        grads[layer] = cache.aggs[layer].T @ g
        if layer == 0:
            break
        gin = adj.matmul(g @ model.weights[layer].T)
        if cache.masks[layer] is not None:
            gin = gin * cache.masks[layer]
        g = gin * (cache.zs[layer - 1] > 0)
    return grads


class AdamState:
    """First/second moment accumulators plus the step counter."""

    __slots__ = ("m", "v", "t", "beta1", "beta2", "eps")

    def __init__(self, model, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros_like(w) for w in model.weights]
        self.v = [np.zeros_like(w) for w in model.weights]
        self.t = 0
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps


def adam_step(model, grads, state, lr, weight_decay=0.0):
    """In-place Adam update; weight decay joins the gradient before moments."""
    if len(grads) != model.num_layers:
        raise ShapeMismatch(f"{len(grads)} gradients for {model.num_layers} layers")
    dtype = model.dtype
    state.t += 1
    b1 = dtype.type(state.beta1)
    b2 = dtype.type(state.beta2)
    bc1 = dtype.type(1.0 - state.beta1**state.t)
    bc2 = dtype.type(1.0 - state.beta2**state.t)
    lr = dtype.type(lr)
    eps = dtype.type(state.eps)
    wd = dtype.type(weight_decay)
    one = dtype.type(1.0)
    for w, g, m, v in zip(model.weights, grads, state.m, state.v):
        if g.shape != w.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} vs weight {w.shape}")
        g = g + wd * w
        m *= b1
        m += (one - b1) * g
        v *= b2
        v += (one - b2) * g * g
        w -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    model.version += 1


def predictions(log_probs):
    return np.argmax(log_probs, axis=1)


def accuracy(log_probs, labels, subset):
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size == 0:
        raise EmptySubset("accuracy needs a non-empty node subset")
    pred = predictions(log_probs[subset])
    return float((pred == np.asarray(labels)[subset]).mean())


def _rows_linear(agg, w):
    # fixed ascending-k accumulation per output element, so the result does
    # not depend on how many rows are in the block (BLAS picks different
    # kernels per shape, einsum does not)
    return np.einsum("rk,km->rm", agg, w)


def gcn_forward_blockwise(model, adj, x, block_size):
    """Inference forward computing each layer in row blocks.

    The output is bit-identical for every block size, including a single
    whole-graph block; useful when intermediate activations for all nodes at
    once would not fit comfortably.
    """
    if x.shape[0] != adj.n:
        raise ShapeMismatch(f"{x.shape[0]} feature rows for {adj.n} nodes")
    dtype = model.dtype
    h = np.ascontiguousarray(x, dtype=dtype)
    last = model.num_layers - 1
    for layer, w in enumerate(model.weights):
        out = np.empty((adj.n, w.shape[1]), dtype=dtype)
        agg = np.empty((adj.n, h.shape[1]), dtype=dtype)
        for r0 in range(0, adj.n, block_size):
            r1 = min(r0 + block_size, adj.n)
            adj.matmul(h, out=agg, r0=r0, r1=r1)
            z = _rows_linear(agg[r0:r1], w)
            out[r0:r1] = np.maximum(z, 0) if layer < last else _log_softmax(z)
        h = out
    return h
