"""Reverse-reachable (RR) set generation and RR-based spread estimators.

Collections are stored in CSR form. An element of a ``T``-round collection
encodes the pair (node u, round t) as ``u * T + t``; single-round
collections hold plain node ids.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .graph import Graph
from .rng import as_generator
from .spread import SeedSchedule, SpreadEstimate


class EmptyRootPool(LookupError):
    """No roots left to sample from."""


class ResourceLimitError(MemoryError):
    """An RR collection would exceed its configured memory budget."""


@dataclass(frozen=True)
class RRSet:
    root: int
    nodes: frozenset


@dataclass(frozen=True)
class MultiRoundRRSet:
    root: int
    per_round: tuple

    @property
    def T(self) -> int:
        return len(self.per_round)

    def pairs(self) -> frozenset:
        return frozenset((u, t) for t, s in enumerate(self.per_round) for u in s)

    def hits(self, sched: SeedSchedule) -> bool:
        return any(set(s) & set(r) for s, r in zip(sched.rounds, self.per_round))


@dataclass(frozen=True)
class RootPool:
    """Multiset of candidate roots; sampling is uniform over entries."""

    roots: np.ndarray
    origin: str = "uniform"
    excluded: frozenset = field(default_factory=frozenset)

    @classmethod
    def uniform(cls, n: int) -> "RootPool":
        return cls(np.arange(n, dtype=np.int64), "uniform")

    @classmethod
    def minus(cls, n: int, excluded) -> "RootPool":
        ex = frozenset(int(v) for v in excluded)
        mask = np.ones(n, dtype=bool)
        if ex:
            mask[list(ex)] = False
        return cls(np.flatnonzero(mask).astype(np.int64), "uniform_minus", ex)

    @classmethod
    def remaining(cls, roots) -> "RootPool":
        return cls(np.asarray(roots, dtype=np.int64), "remaining")

    def __len__(self) -> int:
        return len(self.roots)

    def sample(self, count: int, rng) -> np.ndarray:
        if len(self.roots) == 0:
            raise EmptyRootPool(f"{self.origin} root pool is empty")
        return self.roots[as_generator(rng).integers(0, len(self.roots), size=count)]


def sample_root(pool: RootPool, rng=None) -> int:
    return int(pool.sample(1, rng)[0])


def _check_root(g: Graph, root: int) -> int:
    if not 0 <= root < g.n:
        raise ValueError(f"root {root} outside 0..{g.n - 1}")
    return int(root)


def rr_batch(g: Graph, roots, T: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """CSR (ptr, data) of ``T``-round RR sets, one per root."""
    roots = np.ascontiguousarray(roots, dtype=np.int64)
    return kernels.rr_sets(g.in_ptr, g.in_idx, g.in_p, roots, T, as_generator(rng))


def gen_rr(g: Graph, root: int, rng=None) -> RRSet:
    """Nodes that reach ``root`` in one random live-edge graph."""
    root = _check_root(g, root)
    _, data = rr_batch(g, [root], 1, rng)
    return RRSet(root, frozenset(data.tolist()))


def gen_multi_round_rr(g: Graph, root: int, T: int, rng=None) -> MultiRoundRRSet:
    """``T`` independent RR sets from the same root."""
    root = _check_root(g, root)
    _, data = rr_batch(g, [root], T, rng)
    rounds = [set() for _ in range(T)]
    for x in data.tolist():
        rounds[x % T].add(x // T)
    return MultiRoundRRSet(root, tuple(frozenset(s) for s in rounds))


def validate_conditional_rr(g: Graph, sched: SeedSchedule, root: int, t: int, rng=None) -> RRSet | None:
    """Round-``t`` RR set from ``root``, or None if rejected.

    RR sets for rounds ``0..t-1`` are drawn from the same root; the sample is
    rejected when any of them meets that round's seeds in ``sched``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    mr = gen_multi_round_rr(g, root, t + 1, rng)
    for i in range(t):
        if set(sched.rounds[i]) & mr.per_round[i]:
            return None
    return RRSet(mr.root, mr.per_round[t])


# ---------------------------------------------------------------------------
# collections

class RRCollection:
    """Append-only CSR store of RR sets with their roots."""

    def __init__(self, n: int, T: int = 1, max_bytes: int | None = None):
        self.n = n
        self.T = T
        self.max_bytes = max_bytes
        self._ptr_parts = [np.zeros(1, dtype=np.int64)]
        self._data_parts: list[np.ndarray] = []
        self._root_parts: list[np.ndarray] = []
        self._size = 0
        self._len = 0
        self._cache = None

    def __len__(self) -> int:
        return self._len

    @property
    def nbytes(self) -> int:
        return self._size * 4 + self._len * 16

    def extend(self, ptr: np.ndarray, data: np.ndarray, roots: np.ndarray) -> None:
        if len(roots) == 0:
            return
        if self.max_bytes is not None and self.nbytes + data.nbytes + len(roots) * 16 > self.max_bytes:
            raise ResourceLimitError(
                f"RR collection would exceed {self.max_bytes} bytes ({self._len} sets held)")
        self._ptr_parts.append(ptr[1:] + self._size)
        self._data_parts.append(data)
        self._root_parts.append(np.asarray(roots, dtype=np.int64))
        self._size += len(data)
        self._len += len(roots)
        self._cache = None

    def generate(self, g: Graph, roots, rng) -> None:
        roots = np.asarray(roots, dtype=np.int64)
        if len(roots):
            ptr, data = rr_batch(g, roots, self.T, rng)
            self.extend(ptr, data, roots)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ptr, data, roots) as contiguous arrays."""
        if self._cache is None:
            ptr = np.concatenate(self._ptr_parts)
            data = np.concatenate(self._data_parts) if self._data_parts else np.zeros(0, dtype=np.int32)
            roots = np.concatenate(self._root_parts) if self._root_parts else np.zeros(0, dtype=np.int64)
            self._ptr_parts, self._data_parts, self._root_parts = [ptr], [data], [roots]
            self._cache = (ptr, data, roots)
        return self._cache

    def keep(self, mask: np.ndarray) -> "RRCollection":
        """New collection holding the sets where ``mask`` is true."""
        ptr, data, roots = self.arrays()
        out = RRCollection(self.n, self.T, self.max_bytes)
        sel = np.flatnonzero(mask)
        if len(sel):
            lens = ptr[sel + 1] - ptr[sel]
            new_ptr = np.zeros(len(sel) + 1, dtype=np.int64)
            np.cumsum(lens, out=new_ptr[1:])
            elems = np.concatenate([data[a:b] for a, b in zip(ptr[sel], ptr[sel + 1])])
            out.extend(new_ptr, elems, roots[sel])
        return out

    def hit_mask(self, items: np.ndarray) -> np.ndarray:
        """Boolean per set: does it contain any item flagged in ``items``?"""
        ptr, data, _ = self.arrays()
        if self._len == 0:
            return np.zeros(0, dtype=bool)
        flags = items[data].astype(np.int64)
        return np.add.reduceat(flags, ptr[:-1]) > 0

    def inverted(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-item CSR of the sets containing it."""
        ptr, data, _ = self.arrays()
        n_items = self.n * self.T
        set_of = np.repeat(np.arange(self._len, dtype=np.int64), np.diff(ptr))
        order = np.argsort(data, kind="stable")
        inv_ptr = np.zeros(n_items + 1, dtype=np.int64)
        np.cumsum(np.bincount(data, minlength=n_items), out=inv_ptr[1:])
        return inv_ptr, set_of[order]

    def sets(self):
        ptr, data, roots = self.arrays()
        for i in range(self._len):
            yield int(roots[i]), data[ptr[i]:ptr[i + 1]]

    # binary debug dump: magic, varint header (n, T, count), then per set
    # varint root, varint length, delta-coded sorted ids
    MAGIC = b"MRRR"

    def dump(self, fh) -> None:
        fh.write(self.MAGIC)
        _write_varints(fh, [self.n, self.T, self._len])
        for root, elems in self.sets():
            ids = np.sort(elems).tolist()
            deltas = [ids[0]] + [b - a for a, b in zip(ids, ids[1:])] if ids else []
            _write_varints(fh, [root, len(ids)] + deltas)

    @classmethod
    def load(cls, fh) -> "RRCollection":
        if fh.read(4) != cls.MAGIC:
            raise ValueError("not an RR collection dump")
        it = _read_varints(fh)
        n, T, count = next(it), next(it), next(it)
        out = cls(n, T)
        ptr, data, roots = [0], [], []
        for _ in range(count):
            roots.append(next(it))
            length = next(it)
            acc = 0
            for _ in range(length):
                acc += next(it)
                data.append(acc)
            ptr.append(len(data))
        out.extend(np.array(ptr, dtype=np.int64), np.array(data, dtype=np.int32), np.array(roots, dtype=np.int64))
        return out


def _write_varints(fh, values) -> None:
    buf = bytearray()
    for v in values:
        v = int(v)
        while True:
            byte = v & 0x7F
            v >>= 7
            if v:
                buf.append(byte | 0x80)
            else:
                buf.append(byte)
                break
    fh.write(bytes(buf))


def _read_varints(fh):
    data = fh.read() if not isinstance(fh, (bytes, bytearray)) else fh
    stream = io.BytesIO(data)
    while True:
        shift = 0
        value = 0
        while True:
            b = stream.read(1)
            if not b:
                return
            value |= (b[0] & 0x7F) << shift
            shift += 7
            if not b[0] & 0x80:
                break
        yield value


# ---------------------------------------------------------------------------
# RR-based spread estimators

def _proportion_estimate(hits: int, count: int, scale: float) -> SpreadEstimate:
    phat = hits / count
    se = scale * math.sqrt(phat * (1 - phat) / (count - 1)) if count > 1 else math.inf
    return SpreadEstimate(scale * phat, se, count)


def schedule_items(sched: SeedSchedule, n: int) -> np.ndarray:
    T = sched.T
    items = np.zeros(n * T, dtype=bool)
    for v, t in sched.pairs():
        items[v * T + t] = True
    return items


def estimate_spread_rr(g: Graph, sched: SeedSchedule, count: int, rng=None) -> SpreadEstimate:
    """n times the fraction of random-root multi-round RR sets hit by the schedule."""
    rng = as_generator(rng)
    coll = RRCollection(g.n, sched.T)
    coll.generate(g, RootPool.uniform(g.n).sample(count, rng), rng)
    hits = int(coll.hit_mask(schedule_items(sched, g.n)).sum())
    return _proportion_estimate(hits, count, g.n)


def estimate_weighted_rr(g: Graph, seeds, excluded, count: int, rng=None) -> SpreadEstimate:
    """(n - |A|) times the hit fraction of RR sets rooted outside ``A``."""
    rng = as_generator(rng)
    pool = RootPool.minus(g.n, excluded)
    if len(pool) == 0:
        return SpreadEstimate(0.0, 0.0, count)
    coll = RRCollection(g.n, 1)
    coll.generate(g, pool.sample(count, rng), rng)
    items = np.zeros(g.n, dtype=bool)
    items[list(seeds)] = True
    hits = int(coll.hit_mask(items).sum())
    return _proportion_estimate(hits, count, len(pool))


def estimate_conditional_marginal_rr(g: Graph, prefix: SeedSchedule, seeds_t, t: int, count: int,
                                     rng=None) -> SpreadEstimate:
    """Marginal spread of adding ``seeds_t`` in round ``t`` after ``prefix``.

    Counts roots whose earlier-round RR sets avoid the earlier seeds and whose
    round-``t`` RR set meets ``seeds_t``; scaled by n.
    """
    rng = as_generator(rng)
    T = t + 1
    coll = RRCollection(g.n, T)
    coll.generate(g, RootPool.uniform(g.n).sample(count, rng), rng)
    earlier = SeedSchedule(tuple(prefix.rounds[i] if i < t else () for i in range(T)))
    now = SeedSchedule(tuple(tuple(seeds_t) if i == t else () for i in range(T)))
    accepted = ~coll.hit_mask(schedule_items(earlier, g.n))
    hit_now = coll.hit_mask(schedule_items(now, g.n))
    return _proportion_estimate(int((accepted & hit_now).sum()), count, g.n)
