"""Dense vector helpers and the counter-based random stream.

Every feature vector handled by the package lives on the unit sphere, and
averages of feature vectors are projected back onto it.  The helpers here
enforce that convention in one place.

RngStream
---------
The generator is SplitMix64 used in counter mode.  Draw number ``i``
(0-based) of a stream with seed ``s`` is::

    z = (s + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z = z ^ (z >> 31)

Derived quantities:

* uniform in [0, 1):  ``(z >> 11) * 2**-53``
* integer in [0, n):  ``floor(uniform * n)``
* standard normal:    Box-Muller on two consecutive uniforms ``u1, u2``,
  ``sqrt(-2 log(1 - u1)) * cos(2 pi u2)``; one normal per pair.
* permutation of n:   Fisher-Yates from the back, ``j = floor(u * (i + 1))``
  for ``i = n-1 .. 1``.

Child streams are keyed with :func:`derive_seed`, which folds each key into
the seed with the SplitMix64 finalizer.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVectorError, EmptyInputError, ShapeError

NORM_FLOOR = 1e-12

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def l2_normalize(v):
    """Scale ``v`` to unit Euclidean norm along its last axis.

    Accepts a single vector or a 2-D array of row vectors.  Raises
    :class:`DegenerateVectorError` if any row has norm below 1e-12.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 0 or v.shape[-1] < 1:
        raise ShapeError("expected a vector of length >= 1")
    norms = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
    if np.any(~(norms >= NORM_FLOOR)):
        raise DegenerateVectorError("cannot normalize a zero-norm vector")
    return v / norms


def renormalized_mean(vs):
    """Mean of row vectors ``vs``, projected back onto the unit sphere.

    Columns are summed in sorted order, so the result is bitwise identical
    for any permutation of the rows.
    """
    vs = np.asarray(vs, dtype=np.float64)
    if vs.ndim == 1:
        vs = vs[None, :]
    if vs.ndim != 2:
        raise ShapeError("expected a list of equal-length vectors")
    if vs.shape[0] == 0:
        raise EmptyInputError("mean of an empty list")
    total = np.sort(vs, axis=0).sum(axis=0)
    return l2_normalize(total / vs.shape[0])


def euclidean_distance(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.dot(d, d)))


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically derive a child seed from ``seed`` and integer keys."""
    z = int(seed) & _MASK64
    for key in keys:
        z = _mix_int((z + 0x9E3779B97F4A7C15 + (int(key) & _MASK64) * 0xD1B54A32D192ED03) & _MASK64)
    return z


class RngStream:
    """SplitMix64 counter-mode generator (see module docstring).

    The full state is ``(seed, counter)``; both are plain integers so the
    stream can be checkpointed and restored exactly.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed = int(seed) & _MASK64
        self.counter = int(counter)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def next_u64(self, n: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + idx * _GOLDEN
            out = _mix(z)
        self.counter += n
        return out

    def uniform(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return float(u[0]) if size is None else u.reshape(size)

    def uniform_range(self, low, high, size):
        return low + (high - low) * self.uniform(size)

    def normal(self, size):
        n = int(np.prod(size))
        u = self.uniform(2 * n)
        u1, u2 = u[0::2], u[1::2]
        z = np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)
        return z.reshape(size)

    def integers(self, n: int, size: int) -> np.ndarray:
        return np.floor(self.uniform(size) * n).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        perm = np.arange(n, dtype=np.int64)
        if n < 2:
            return perm
        u = self.uniform(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = int(u[k] * (i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def spawn(self, *keys: int) -> "RngStream":
        return RngStream(derive_seed(self.seed, *keys))
