"""Binary checkpoints of a :class:`LearnerState`.

Byte layout (every integer and float little-endian)::

    offset  size  field
    0       8     magic  b"ICRLCKPT"
    8       4     u32    format version (currently 1)
    12      4     u32    byte-order mark 0x01020304
    16      8     u64    payload length P
    24      P     payload
    24+P    4     u32    CRC-32 of the payload

Payload, in order::

    u32 L, L bytes      strategy name (UTF-8)
    u64, u64            RNG seed, RNG counter
    u64                 step index
    u64 input_dim, u64 H, H x u64 hidden widths, u64 feature_dim
    u64 t
    t x i64             class registry (dataset label of internal class i)
    for each layer:     f64[fan_out * fan_in] weights (row-major), f64[fan_out] bias
    f64[t * feature_dim] class weight vectors (row-major)
    u64 K               exemplar budget
    u64 n               number of exemplar lists
    n x { u64 class_id, u64 m, m x i64 sample indices, f64[m * input_dim] raw samples }

Only exemplars are stored, never past training batches.
"""

from __future__ import annotations

import os
import struct
import zlib
from pathlib import Path

import numpy as np

from .baselines import STRATEGIES
from .core import RngStream
from .errors import InvariantViolationError, TruncationError, VersionMismatchError
from .exemplars import ExemplarList, ExemplarMemory
from .net import ModelParams, NetSpec
from .trainer import LearnerState

MAGIC = b"ICRLCKPT"
VERSION = 1
BOM = 0x01020304
HEADER = struct.Struct("<8sIIQ")


def _u64(*vals):
    return struct.pack(f"<{len(vals)}Q", *vals)


def _f64(a):
    return np.ascontiguousarray(a, dtype="<f8").tobytes()


def encode_state(state: LearnerState) -> bytes:
    spec = state.net_spec
    name = state.strategy.encode("utf-8")
    out = [struct.pack("<I", len(name)), name]
    out.append(_u64(state.rng.seed, state.rng.counter, state.step_index))
    out.append(_u64(spec.input_dim, len(spec.hidden), *spec.hidden, spec.feature_dim))
    out.append(_u64(state.t))
    out.append(np.asarray(state.registry, dtype="<i8").tobytes())
    for w, b in zip(state.params.weights, state.params.biases):
        out += [_f64(w), _f64(b)]
    out.append(_f64(state.params.class_weights))
    lists = sorted(state.memory.per_class.items())
    out.append(_u64(state.memory.budget, len(lists)))
    for y, P in lists:
        out.append(_u64(y, len(P)))
        out.append(np.asarray(P.indices, dtype="<i8").tobytes())
        out.append(_f64(P.items))
    payload = b"".join(out)
    return HEADER.pack(MAGIC, VERSION, BOM, len(payload)) + payload + struct.pack("<I", zlib.crc32(payload))


def save_checkpoint(state: LearnerState, path) -> None:
    data = encode_state(state)
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise TruncationError(f"checkpoint truncated: needed {n} bytes at offset {self.pos}")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self, n=None):
        vals = struct.unpack(f"<{n or 1}Q", self.take(8 * (n or 1)))
        return vals if n else vals[0]

    def count(self, limit: int, what: str) -> int:
        v = self.u64()
        if v > limit:
            raise InvariantViolationError(what, f"implausible value {v}")
        return v

    def f64(self, shape):
        n = int(np.prod(shape))
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64).reshape(shape)

    def i64(self, n):
        return np.frombuffer(self.take(8 * n), dtype="<i8").astype(np.int64)


def decode_state(data: bytes) -> LearnerState:
    """Parse and validate checkpoint bytes; never returns a partial state."""
    if len(data) < HEADER.size:
        raise TruncationError("checkpoint shorter than its header")
    magic, version, bom, length = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvariantViolationError("magic", f"bad magic {magic!r}")
    if bom != BOM:
        raise InvariantViolationError("byte-order mark", hex(bom))
    if version != VERSION:
        raise VersionMismatchError(f"checkpoint version {version}, expected {VERSION}")
    end = HEADER.size + length
    if len(data) < end + 4:
        raise TruncationError(f"checkpoint truncated: {len(data)} of {end + 4} bytes")
    if len(data) > end + 4:
        raise InvariantViolationError("length", f"{len(data) - end - 4} trailing bytes")
    payload = data[HEADER.size:end]
    if zlib.crc32(payload) != struct.unpack_from("<I", data, end)[0]:
        raise InvariantViolationError("checksum", "CRC-32 mismatch")

    r = _Reader(payload)
    limit = len(payload)
    name = r.take(r.u32()).decode("utf-8", errors="replace")
    if name not in STRATEGIES:
        raise InvariantViolationError("strategy", name)
    seed, counter, step = r.u64(3)
    input_dim = r.count(limit, "input_dim")
    n_hidden = r.count(limit, "hidden layer count")
    hidden = r.u64(n_hidden) if n_hidden else ()
    feature_dim = r.count(limit, "feature_dim")
    try:
        net_spec = NetSpec(input_dim, hidden, feature_dim)
    except ValueError as exc:
        raise InvariantViolationError("net spec", str(exc)) from None
    t = r.count(limit, "class count")
    registry = [int(v) for v in r.i64(t)]
    if len(set(registry)) != t:
        raise InvariantViolationError("registry", "duplicate labels")
    weights, biases = [], []
    for fan_in, fan_out in net_spec.layer_dims:
        weights.append(r.f64((fan_out, fan_in)))
        biases.append(r.f64((fan_out,)))
    params = ModelParams(weights, biases, r.f64((t, feature_dim)))
    if not params.is_finite():
        raise InvariantViolationError("finite parameters")

    K = r.u64()
    n_lists = r.count(limit, "exemplar list count")
    memory = ExemplarMemory(K)
    for _ in range(n_lists):
        y = r.u64()
        m = r.count(limit, "exemplar count")
        idx = r.i64(m)
        items = r.f64((m, input_dim))
        if y >= t or y in memory.per_class:
            raise InvariantViolationError("one exemplar list per observed class", f"class {y}")
        if np.unique(idx).size != m:
            raise InvariantViolationError("distinct exemplars", f"class {y}")
        if not np.all(np.isfinite(items)):
            raise InvariantViolationError("finite exemplars", f"class {y}")
        memory.per_class[y] = ExemplarList(y, items, idx)
    if r.pos != len(payload):
        raise InvariantViolationError("length", "payload has unread bytes")
    if memory.total() > K:
        raise InvariantViolationError("exemplar total <= K", f"{memory.total()} > {K}")
    if memory.per_class and sorted(memory.per_class) != list(range(t)):
        raise InvariantViolationError("one exemplar list per observed class")
    return LearnerState(net_spec, params, memory, registry, step, RngStream(seed, counter), name)


def load_checkpoint(path) -> LearnerState:
    return decode_state(Path(path).read_bytes())
