"""Directed graphs with per-edge activation probabilities (independent cascade)."""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

TRIVALENCY_LEVELS = (0.1, 0.01, 0.001)


class EdgeListError(ValueError):
    """Raised for malformed edge-list input; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class WeightScheme:
    """How edge probabilities are assigned.

    ``kind`` is one of ``file``, ``constant``, ``wc`` (weighted cascade,
    ``p_uv = 1/indeg(v)``) or ``trivalency`` (uniform choice from
    0.1/0.01/0.001, seeded).
    """

    kind: str = "file"
    p: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("file", "constant", "wc", "trivalency"):
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "constant" and not 0.0 <= self.p <= 1.0:
            raise ValueError(f"constant probability {self.p} outside [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "WeightScheme":
        """Parse ``file``, ``wc``, ``constant:0.05`` or ``trivalency:7``."""
        name, _, arg = text.partition(":")
        name = name.strip().lower()
        aliases = {"fromfile": "file", "weighted_cascade": "wc", "weightedcascade": "wc", "const": "constant"}
        name = aliases.get(name, name)
        if name == "constant":
            return cls("constant", p=float(arg) if arg else 0.1)
        if name == "trivalency":
            return cls("trivalency", seed=int(arg) if arg else 0)
        if arg:
            raise ValueError(f"scheme {name!r} takes no argument")
        return cls(name)

    def __str__(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.p}"
        if self.kind == "trivalency":
            return f"trivalency:{self.seed}"
        return self.kind

    def assign(self, src: np.ndarray, dst: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
        """Return probabilities for the (already deduplicated) edges."""
        if self.kind == "file":
            return p.astype(np.float64)
        if self.kind == "constant":
            return np.full(len(src), self.p, dtype=np.float64)
        if self.kind == "wc":
            indeg = np.bincount(dst, minlength=n)
            return 1.0 / indeg[dst].astype(np.float64)
        rng = np.random.default_rng(self.seed)
        return np.asarray(TRIVALENCY_LEVELS, dtype=np.float64)[rng.integers(0, 3, size=len(src))]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable CSR graph. Node ids are dense ``0..n-1``.

    Both adjacency directions are stored; ``in_eid[j]`` is the position in the
    out-arrays of the edge stored at in-slot ``j``.
    """

    n: int
    out_ptr: np.ndarray
    out_idx: np.ndarray
    out_p: np.ndarray
    in_ptr: np.ndarray
    in_idx: np.ndarray
    in_p: np.ndarray
    in_eid: np.ndarray
    labels: np.ndarray | None = None
    dropped_self_loops: int = 0
    _meta: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return int(self.out_idx.shape[0])

    @classmethod
    def from_edges(cls, n, src, dst, p=None, *, labels=None, scheme: WeightScheme | None = None) -> "Graph":
        """Build a graph; drops self-loops and keeps the max probability of duplicates."""
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        p = np.ones(len(src)) if p is None else np.asarray(p, dtype=np.float64).ravel()
        if not (len(src) == len(dst) == len(p)):
            raise ValueError("src, dst and p must have equal length")
        if n < 0 or (len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n)):
            raise ValueError("edge endpoint outside 0..n-1")
        if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
            raise ValueError("edge probability outside [0, 1]")
        loops = src == dst
        dropped = int(loops.sum())
        if dropped:
            log.warning("dropped %d self-loop(s)", dropped)
            src, dst, p = src[~loops], dst[~loops], p[~loops]
        # dedup: sort by (src, dst, -p) and keep the first of each pair
        order = np.lexsort((-p, dst, src))
        src, dst, p = src[order], dst[order], p[order]
        keep = np.ones(len(src), dtype=bool)
        keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        src, dst, p = src[keep], dst[keep], p[keep]
        if scheme is not None:
            p = scheme.assign(src, dst, p, n)
        return cls._from_sorted(n, src, dst, p, labels=labels, dropped=dropped)

    @classmethod
    def _from_sorted(cls, n, src, dst, p, labels=None, dropped=0):
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
        in_order = np.lexsort((src, dst))
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_ptr[1:])
        g = cls(
            n=int(n),
            out_ptr=out_ptr,
            out_idx=dst.astype(np.int32),
            out_p=np.ascontiguousarray(p, dtype=np.float64),
            in_ptr=in_ptr,
            in_idx=src[in_order].astype(np.int32),
            in_p=np.ascontiguousarray(p[in_order], dtype=np.float64),
            in_eid=in_order.astype(np.int64),
            labels=None if labels is None else np.asarray(labels),
            dropped_self_loops=dropped,
        )
        for arr in (g.out_ptr, g.out_idx, g.out_p, g.in_ptr, g.in_idx, g.in_p, g.in_eid):
            arr.flags.writeable = False
        return g

    def out_adj(self, u: int) -> list[tuple[int, float]]:
        a, b = self.out_ptr[u], self.out_ptr[u + 1]
        return list(zip(self.out_idx[a:b].tolist(), self.out_p[a:b].tolist()))

    def in_adj(self, v: int) -> list[tuple[int, float]]:
        a, b = self.in_ptr[v], self.in_ptr[v + 1]
        return list(zip(self.in_idx[a:b].tolist(), self.in_p[a:b].tolist()))

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src, dst, p) in out-CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.out_ptr))
        return src, self.out_idx.astype(np.int64), self.out_p.copy()

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def check(self) -> None:
        """Cross-check the two adjacency directions; raises ValueError on mismatch."""
        src, dst, p = self.edges()
        problems = []
        if not self.out_ptr[-1] == self.m == self.in_ptr[-1] == len(self.in_idx):
            problems.append("edge counts differ between directions")
        elif not (np.array_equal(src[self.in_eid], self.in_idx)
                  and np.array_equal(dst[self.in_eid], np.repeat(np.arange(self.n), np.diff(self.in_ptr)))
                  and np.array_equal(p[self.in_eid], self.in_p)):
            problems.append("in- and out-adjacency describe different edges")
        if np.any((p < 0) | (p > 1)):
            problems.append("probability outside [0, 1]")
        if problems:
            raise ValueError("; ".join(problems))

    def same_as(self, other: "Graph") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.out_ptr, other.out_ptr)
            and np.array_equal(self.out_idx, other.out_idx)
            and np.array_equal(self.out_p, other.out_p)
        )

    def with_scheme(self, scheme: WeightScheme) -> "Graph":
        src, dst, p = self.edges()
        return Graph._from_sorted(self.n, src, dst, scheme.assign(src, dst, p, self.n), labels=self.labels)

    def to_bytes(self) -> bytes:
        return serialize_edge_list(self).encode()

    def label(self, v: int):
        return int(v) if self.labels is None else self.labels[v].item()


_HEADER = re.compile(r"^#\s*(\d+)\s+(\d+)\s*$")


def load_edge_list(path, scheme: WeightScheme | str = "file") -> Graph:
    """Read a whitespace-separated ``u v [p]`` edge list.

    An optional first line ``# n m`` fixes the node count; ids are then taken
    as-is. Without it, the distinct ids are remapped to ``0..n-1`` in sorted
    order and the originals kept in ``Graph.labels``. Other ``#`` lines are
    comments. With a non-``file`` scheme, probabilities in the file are
    ignored.
    """
    if isinstance(scheme, str):
        scheme = WeightScheme.parse(scheme)
    text = Path(path).read_text()
    return parse_edge_list(text, scheme)


def parse_edge_list(text: str, scheme: WeightScheme | str = "file") -> Graph:
    if isinstance(scheme, str):
        scheme = WeightScheme.parse(scheme)
    header_n = None
    src, dst, prob = [], [], []
    saw_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            mh = _HEADER.match(line)
            if mh and not saw_data and header_n is None:
                header_n = int(mh.group(1))
            continue
        saw_data = True
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListError(f"expected 'u v [p]', got {raw!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"node ids must be integers: {raw!r}", lineno) from None
        if u < 0 or v < 0:
            raise EdgeListError("node ids must be non-negative", lineno)
        if len(parts) == 3:
            try:
                p = float(parts[2])
            except ValueError:
                raise EdgeListError(f"bad probability {parts[2]!r}", lineno) from None
            if not 0.0 <= p <= 1.0:
                raise EdgeListError(f"probability {p} outside [0, 1]", lineno)
        else:
            if scheme.kind == "file":
                raise EdgeListError("missing probability (scheme 'file' needs 'u v p')", lineno)
            p = 1.0
        src.append(u)
        dst.append(v)
        prob.append(p)

    src_a = np.asarray(src, dtype=np.int64)
    dst_a = np.asarray(dst, dtype=np.int64)
    labels = None
    if header_n is not None:
        n = header_n
        if len(src_a) and max(src_a.max(), dst_a.max()) >= n:
            raise EdgeListError(f"node id exceeds header node count {n}")
    else:
        ids = np.unique(np.concatenate([src_a, dst_a]))
        n = len(ids)
        if n and not (ids[0] == 0 and ids[-1] == n - 1):
            labels = ids
            src_a = np.searchsorted(ids, src_a)
            dst_a = np.searchsorted(ids, dst_a)
    return Graph.from_edges(n, src_a, dst_a, np.asarray(prob), labels=labels, scheme=scheme)


def serialize_edge_list(g: Graph) -> str:
    src, dst, p = g.edges()
    lines = [f"# {g.n} {g.m}"]
    lines.extend(f"{u} {v} {x:.17g}" for u, v, x in zip(src.tolist(), dst.tolist(), p.tolist()))
    return "\n".join(lines) + "\n"


def save_edge_list(g: Graph, path) -> None:
    Path(path).write_text(serialize_edge_list(g))


def generate_synthetic(kind: str, n: int, *, avg_deg: float = 4.0, exponent: float = 2.5,
                       scheme: WeightScheme | str = "wc", seed: int = 0) -> Graph:
    """Seeded random graphs.

    ``erdos_renyi``: directed G(n, p) with ``p = avg_deg / (n - 1)``.
    ``power_law``: undirected Chung-Lu graph with expected degrees following
    a power law of the given exponent (mean ``avg_deg``), stored with both
    edge directions like a collaboration network.
    """
    if isinstance(scheme, str):
        scheme = WeightScheme.parse(scheme)
    if n < 2:
        raise ValueError("n must be at least 2")
    if avg_deg < 0:
        raise ValueError("avg_deg must be non-negative")
    rng = np.random.default_rng(seed)
    if kind in ("erdos_renyi", "er"):
        if avg_deg > n - 1:
            raise ValueError("avg_deg cannot exceed n - 1")
        total = n * (n - 1)
        m = int(rng.binomial(total, avg_deg / (n - 1)))
        picks = np.sort(rng.choice(total, size=m, replace=False))
        src = picks // (n - 1)
        off = picks % (n - 1)
        dst = off + (off >= src)
    elif kind in ("power_law", "pl"):
        if exponent <= 2.0:
            raise ValueError("exponent must exceed 2")
        w = np.arange(1, n + 1, dtype=np.float64) ** (-1.0 / (exponent - 1.0))
        w *= avg_deg * n / w.sum()
        m_und = int(round(w.sum() / 2))
        prob = w / w.sum()
        a = rng.choice(n, size=m_und, p=prob)
        b = rng.choice(n, size=m_und, p=prob)
        # shuffle labels so that hub ids are not simply the smallest ones
        perm = rng.permutation(n)
        a, b = perm[a], perm[b]
        src = np.concatenate([a, b])
        dst = np.concatenate([b, a])
    else:
        raise ValueError(f"unknown generator {kind!r}")
    keep = src != dst
    return Graph.from_edges(n, src[keep], dst[keep], np.ones(int(keep.sum())), scheme=scheme)


def log_binomial(n: int, k: int) -> float:
    """ln C(n, k) via log-gamma."""
    if k < 0 or k > n:
        raise ValueError("need 0 <= k <= n")
    k = min(k, n - k)
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
