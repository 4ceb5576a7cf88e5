"""Hot inner loops: random-walk tree samplers, DFS linearization, CSR helpers.

Every function here operates on plain numpy arrays so it can run either
numba-compiled (the default) or as pure Python/numpy when ``GERN_NUMBA=0``;
see :mod:`gern.backend`.  Randomness comes from a one-element uint64 splitmix64
state (see :mod:`gern.rng`) so both backends draw identical sequences.

Graphs arrive as CSR: ``indptr`` (int64, n+1) and ``indices`` (int64, 2m)
with sorted neighbor lists.  Trees are parent arrays with ``parent[root] = -1``.
"""

import numpy as np

from .backend import BACKEND, maybe_njit

if BACKEND == "numba":
    from numba import prange
else:  # pragma: no cover - exercised via GERN_NUMBA=0
    prange = range

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)


@maybe_njit(cache=True, nogil=True)
def _next_u64(state):
    state[0] += _GOLDEN
    z = state[0]
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@maybe_njit(cache=True, nogil=True)
def _randint(state, bound):
    # bound <= n << 2**64, so the modulo bias is far below statistical detection
    return np.int64(_next_u64(state) % U64(bound))


@maybe_njit(cache=True, nogil=True)
def _shuffle(state, arr):
    for i in range(len(arr) - 1, 0, -1):
        j = _randint(state, i + 1)
        t = arr[i]
        arr[i] = arr[j]
        arr[j] = t


@maybe_njit(cache=True, nogil=True)
def component_labels(indptr, indices):
    """Label connected components by BFS; returns (labels, count)."""
    n = indptr.shape[0] - 1
    labels = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    count = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = count
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for idx in range(indptr[u], indptr[u + 1]):
                v = indices[idx]
                if labels[v] < 0:
                    labels[v] = count
                    queue[tail] = v
                    tail += 1
        count += 1
    return labels, count


@maybe_njit(cache=True, nogil=True)
def khop_distances(indptr, indices, seeds, k):
    """Multi-source BFS distances, capped at k; unreached nodes get -1."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    tail = 0
    for s in seeds:
        if dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    head = 0
    while head < tail:
        u = queue[head]
        head += 1
        if dist[u] >= k:
            continue
        for idx in range(indptr[u], indptr[u + 1]):
            v = indices[idx]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue[tail] = v
                tail += 1
    return dist


@maybe_njit(cache=True, nogil=True)
def induced_edges(indptr, indices, remap, kept_edges_cap):
    """Edges of the subgraph induced on nodes with remap[v] >= 0, remapped."""
    n = indptr.shape[0] - 1
    out_u = np.empty(kept_edges_cap, dtype=np.int64)
    out_v = np.empty(kept_edges_cap, dtype=np.int64)
    cnt = 0
    for u in range(n):
        ru = remap[u]
        if ru < 0:
            continue
        for idx in range(indptr[u], indptr[u + 1]):
            v = indices[idx]
            if v > u and remap[v] >= 0:
                out_u[cnt] = ru
                out_v[cnt] = remap[v]
                cnt += 1
    return out_u[:cnt], out_v[:cnt]


@maybe_njit(cache=True, nogil=True)
def aldous_broder_parent(indptr, indices, state, max_steps):
    """First-entry random-walk spanning tree; returns (parent, steps_taken).

    steps_taken is -1 when the cap was hit before covering the graph.
    """
    n = indptr.shape[0] - 1
    parent = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=np.bool_)
    u = _randint(state, n)
    visited[u] = True
    nvis = 1
    steps = np.int64(0)
    while nvis < n:
        if steps >= max_steps:
            return parent, np.int64(-1)
        deg = indptr[u + 1] - indptr[u]
        v = indices[indptr[u] + _randint(state, deg)]
        steps += 1
        if not visited[v]:
            visited[v] = True
            parent[v] = u
            nvis += 1
        u = v
    return parent, steps


@maybe_njit(cache=True, nogil=True)
def _wilson_fill(indptr, indices, state, in_tree, parent):
    """Complete a rooted partial tree by loop-erased random walks.

    Walks start from every node not yet in the tree, in ascending index
    order; successor pointers realize the loop erasure.
    """
    n = indptr.shape[0] - 1
    succ = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        if in_tree[i]:
            continue
        u = i
        while not in_tree[u]:
            deg = indptr[u + 1] - indptr[u]
            v = indices[indptr[u] + _randint(state, deg)]
            succ[u] = v
            u = v
        u = i
        while not in_tree[u]:
            in_tree[u] = True
            parent[u] = succ[u]
            u = succ[u]


@maybe_njit(cache=True, nogil=True)
def wilson_parent(indptr, indices, state):
    n = indptr.shape[0] - 1
    parent = np.full(n, -1, dtype=np.int64)
    in_tree = np.zeros(n, dtype=np.bool_)
    root = _randint(state, n)
    in_tree[root] = True
    _wilson_fill(indptr, indices, state, in_tree, parent)
    return parent


@maybe_njit(cache=True, nogil=True)
def arst_parent(indptr, indices, state, walk_steps):
    """Hybrid tree: first-entry random walk for walk_steps transitions, then
    loop-erased completion of the remainder."""
    n = indptr.shape[0] - 1
    parent = np.full(n, -1, dtype=np.int64)
    in_tree = np.zeros(n, dtype=np.bool_)
    u = _randint(state, n)
    in_tree[u] = True
    nvis = 1
    steps = np.int64(0)
    while steps < walk_steps and nvis < n:
        deg = indptr[u + 1] - indptr[u]
        v = indices[indptr[u] + _randint(state, deg)]
        steps += 1
        if not in_tree[v]:
            in_tree[v] = True
            parent[v] = u
            nvis += 1
        u = v
    if nvis < n:
        _wilson_fill(indptr, indices, state, in_tree, parent)
    return parent


@maybe_njit(cache=True, nogil=True)
def bfs_parent(indptr, indices, state):
    """Breadth-first spanning tree from a random root, neighbors in random order."""
    n = indptr.shape[0] - 1
    parent = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    root = _randint(state, n)
    visited[root] = True
    queue[0] = root
    head, tail = 0, 1
    buf = np.empty(n, dtype=np.int64)
    while head < tail:
        u = queue[head]
        head += 1
        lo, hi = indptr[u], indptr[u + 1]
        cnt = 0
        for idx in range(lo, hi):
            v = indices[idx]
            if not visited[v]:
                buf[cnt] = v
                cnt += 1
        _shuffle(state, buf[:cnt])
        for j in range(cnt):
            v = buf[j]
            if not visited[v]:
                visited[v] = True
                parent[v] = u
                queue[tail] = v
                tail += 1
    return parent


@maybe_njit(cache=True, nogil=True)
def tree_csr(parent):
    """CSR adjacency of the tree given by a parent array."""
    n = parent.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for u in range(n):
        p = parent[u]
        if p >= 0:
            deg[u] += 1
            deg[p] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for u in range(n):
        indptr[u + 1] = indptr[u] + deg[u]
    fill = indptr[:-1].copy()
    indices = np.empty(indptr[n], dtype=np.int64)
    for u in range(n):
        p = parent[u]
        if p >= 0:
            indices[fill[u]] = p
            fill[u] += 1
            indices[fill[p]] = u
            fill[p] += 1
    return indptr, indices


@maybe_njit(cache=True, nogil=True)
def dfs_preorder(tindptr, tindices, start, state):
    """Depth-first preorder of a tree with uniformly shuffled child order."""
    n = tindptr.shape[0] - 1
    order = np.empty(n, dtype=np.int64)
    visited = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    stack[0] = start
    top = 1
    pos = 0
    while top > 0:
        top -= 1
        u = stack[top]
        if visited[u]:
            continue
        visited[u] = True
        order[pos] = u
        pos += 1
        cnt = 0
        for idx in range(tindptr[u], tindptr[u + 1]):
            v = tindices[idx]
            if not visited[v]:
                buf[cnt] = v
                cnt += 1
        _shuffle(state, buf[:cnt])
        for j in range(cnt):
            stack[top] = buf[j]
            top += 1
    return order


@maybe_njit(cache=True, nogil=True)
def tally_tree_edges(parent, indptr, indices, edge_ids, counts):
    """Add 1 to counts[edge id] for every edge of the tree."""
    n = parent.shape[0]
    for u in range(n):
        p = parent[u]
        if p < 0:
            continue
        lo, hi = indptr[u], indptr[u + 1]
        while lo < hi:  # binary search for p in the sorted neighbor list of u
            mid = (lo + hi) // 2
            if indices[mid] < p:
                lo = mid + 1
            else:
                hi = mid
        counts[edge_ids[lo]] += 1


def _spmm_rows_loop(indptr, indices, weights, x, out, r0, r1):
    """out[r0:r1] = (CSR matrix) @ x restricted to rows [r0, r1)."""
    d = x.shape[1]
    for i in prange(r0, r1):
        for c in range(d):
            out[i, c] = 0.0
        for idx in range(indptr[i], indptr[i + 1]):
            j = indices[idx]
            w = weights[idx]
            for c in range(d):
                out[i, c] += w * x[j, c]


def _spmm_rows_numpy(indptr, indices, weights, x, out, r0, r1):
    """Vectorized fallback, bit-identical to the loop kernel.

    Accumulates position k of every row in one shot, ascending k, which is
    the loop's exact addition order (reduceat would sum pairwise and drift
    in the last ulp).
    """
    lo = indptr[r0]
    prod = weights[lo : indptr[r1], None] * x[indices[lo : indptr[r1]]]
    starts = indptr[r0:r1] - lo
    degs = indptr[r0 + 1 : r1 + 1] - indptr[r0:r1]
    out[r0:r1] = 0.0
    rows = np.arange(r0, r1)
    for k in range(int(degs.max()) if len(degs) else 0):
        act = degs > k
        out[rows[act]] += prod[starts[act] + k]


if BACKEND == "numba":
    import numba

    spmm_rows = numba.njit(parallel=True, cache=True, nogil=True)(_spmm_rows_loop)
else:  # pragma: no cover - exercised via GERN_NUMBA=0
    spmm_rows = _spmm_rows_numpy


def warmup():
    """Trigger JIT compilation of every kernel on a tiny graph."""
    indptr = np.array([0, 1, 3, 4], dtype=np.int64)
    indices = np.array([1, 0, 2, 1], dtype=np.int64)
    edge_ids = np.array([0, 0, 1, 1], dtype=np.int64)
    state = np.array([1], dtype=np.uint64)
    component_labels(indptr, indices)
    khop_distances(indptr, indices, np.array([0], dtype=np.int64), 1)
    induced_edges(indptr, indices, np.arange(3, dtype=np.int64), 2)
    aldous_broder_parent(indptr, indices, state, 1000)
    parent = wilson_parent(indptr, indices, state)
    arst_parent(indptr, indices, state, 2)
    bfs_parent(indptr, indices, state)
    ti, tx = tree_csr(parent)
    dfs_preorder(ti, tx, 0, state)
    tally_tree_edges(parent, indptr, indices, edge_ids, np.zeros(2, dtype=np.int64))
    x = np.ones((3, 2), dtype=np.float64)
    spmm_rows(indptr, indices, np.ones(4), x, np.empty_like(x), 0, 3)
    x32 = np.ones((3, 2), dtype=np.float32)
    spmm_rows(indptr, indices, np.ones(4, dtype=np.float32), x32, np.empty_like(x32), 0, 3)
