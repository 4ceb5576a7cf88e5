"""Deterministic random streams shared by Python code and compiled kernels.

A stream is identified by a 64-bit ``seed`` and an integer ``stream`` id.  The
generator is splitmix64: the state advances by a fixed increment per draw and
the output is a mix of the state, so a block of k draws can be produced in one
vectorized numpy pass while compiled kernels advance the very same state one
draw at a time.  Identical (seed, stream) pairs therefore yield identical
sequences regardless of backend or of how draws are grouped.
"""

import numpy as np

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
MIX1 = U64(0xBF58476D1CE4E5B9)
MIX2 = U64(0x94D049BB133111EB)
_INV53 = 1.0 / float(1 << 53)


def _mix(z):
    """splitmix64 finalizer; works on uint64 scalars and arrays alike."""
    z = (z ^ (z >> U64(30))) * MIX1
    z = (z ^ (z >> U64(27))) * MIX2
    return z ^ (z >> U64(31))


class RngStream:
    """Seeded random stream with numpy-vectorized draws and a kernel-visible state.

    ``state`` is a one-element uint64 array; compiled kernels receive it
    directly and advance it in place, interleaving deterministically with the
    Python-side draws below.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        with np.errstate(over="ignore"):
            s0 = _mix(U64(self.seed & 0xFFFFFFFFFFFFFFFF) + GOLDEN)
            s1 = _mix(U64(self.stream & 0xFFFFFFFFFFFFFFFF) * MIX1 + MIX2)
            self.state = np.array([_mix(s0 ^ s1)], dtype=np.uint64)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def spawn(self, index: int) -> "RngStream":
        """Independent child stream; spawn(i) is a pure function of (seed, stream, i)."""
        with np.errstate(over="ignore"):
            child = int(_mix(U64(self.stream) * GOLDEN + U64(index) + U64(1)))
        return RngStream(self.seed, child)

    def u64(self, size: int) -> np.ndarray:
        """Next ``size`` raw 64-bit draws."""
        with np.errstate(over="ignore"):
            idx = self.state[0] + GOLDEN * np.arange(1, size + 1, dtype=np.uint64)
            out = _mix(idx)
            self.state[0] += GOLDEN * U64(size)
        return out

    def random(self, size=None):
        """Uniform floats in [0, 1)."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.u64(n) >> U64(11)).astype(np.float64) * _INV53
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def normal(self, size, scale: float = 1.0) -> np.ndarray:
        """Standard normal draws via Box-Muller."""
        n = int(np.prod(size))
        half = (n + 1) // 2
        u1 = ((self.u64(half) >> U64(11)).astype(np.float64) + 1.0) * _INV53  # (0, 1]
        u2 = (self.u64(half) >> U64(11)).astype(np.float64) * _INV53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return (scale * z).reshape(size)

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return low + (high - low) * self.random(size)

    def integers(self, bound: int, size=None):
        """Uniform integers in [0, bound)."""
        n = 1 if size is None else int(np.prod(size))
        with np.errstate(over="ignore"):
            v = (self.u64(n) % U64(bound)).astype(np.int64)
        if size is None:
            return int(v[0])
        return v.reshape(size)

    def shuffle(self, arr: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle (matches the kernel-side shuffle)."""
        for i in range(len(arr) - 1, 0, -1):
            j = self.integers(i + 1)
            arr[i], arr[j] = arr[j], arr[i]

    def permutation(self, n: int) -> np.ndarray:
        out = np.arange(n, dtype=np.int64)
        self.shuffle(out)
        return out
