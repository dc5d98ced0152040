"""Influence-spread evaluation for multi-round seed schedules.

Two routes to the same quantity: exact enumeration of live-edge outcomes on
tiny graphs (the test oracle), and Monte-Carlo estimation on anything else.
Rounds are indexed from 0 throughout the Python API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .graph import Graph
from .rng import as_generator, map_chunks, substreams

MC_CHUNK = 4096
Z95 = 1.96


class InstanceTooLarge(ValueError):
    """The exact oracle would enumerate too many coin flips."""


@dataclass(frozen=True)
class SeedSchedule:
    """Per-round seed sets. The same node may be seeded in several rounds."""

    rounds: tuple

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(tuple(sorted(set(int(v) for v in s))) for s in self.rounds))

    @classmethod
    def empty(cls, T: int) -> "SeedSchedule":
        return cls(((),) * T)

    @classmethod
    def from_pairs(cls, pairs, T: int) -> "SeedSchedule":
        rounds = [[] for _ in range(T)]
        for v, t in pairs:
            if not 0 <= t < T:
                raise ValueError(f"round {t} outside 0..{T - 1}")
            rounds[t].append(v)
        return cls(tuple(rounds))

    @property
    def T(self) -> int:
        return len(self.rounds)

    def pairs(self) -> list[tuple[int, int]]:
        return [(v, t) for t, s in enumerate(self.rounds) for v in s]

    def __len__(self) -> int:
        return sum(len(s) for s in self.rounds)

    def __contains__(self, pair) -> bool:
        v, t = pair
        return v in self.rounds[t]

    def add(self, v: int, t: int) -> "SeedSchedule":
        rounds = list(self.rounds)
        rounds[t] = rounds[t] + (v,)
        return SeedSchedule(tuple(rounds))

    def prefix(self, t: int) -> "SeedSchedule":
        """Rounds ``0..t-1`` kept, later rounds emptied."""
        return SeedSchedule(tuple(s if i < t else () for i, s in enumerate(self.rounds)))

    def permuted(self, order) -> "SeedSchedule":
        return SeedSchedule(tuple(self.rounds[i] for i in order))

    def respects(self, k: int) -> bool:
        return all(len(s) <= k for s in self.rounds)

    def union(self, other: "SeedSchedule") -> "SeedSchedule":
        return SeedSchedule(tuple(a + b for a, b in zip(self.rounds, other.rounds)))

    def issubset(self, other: "SeedSchedule") -> bool:
        return all(set(a) <= set(b) for a, b in zip(self.rounds, other.rounds))

    def to_json(self, labels=None) -> dict:
        lab = (lambda v: v) if labels is None else (lambda v: labels[v].item())
        return {"T": self.T, "rounds": [[lab(v) for v in s] for s in self.rounds]}


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    stderr: float
    r: int

    @property
    def ci95(self) -> tuple[float, float]:
        if not math.isfinite(self.stderr):
            return (-math.inf, math.inf)
        return (self.mean - Z95 * self.stderr, self.mean + Z95 * self.stderr)

    @property
    def ci_defined(self) -> bool:
        return math.isfinite(self.stderr)

    def within(self, value: float, z: float = 3.0) -> bool:
        return abs(self.mean - value) <= z * self.stderr + 1e-12


class RunningStats:
    """Welford accumulator with Chan's pairwise merge."""

    __slots__ = ("count", "mean", "m2")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)

    @classmethod
    def of(cls, values) -> "RunningStats":
        arr = np.asarray(values, dtype=np.float64)
        st = cls()
        if arr.size:
            st.count = int(arr.size)
            st.mean = float(arr.mean())
            st.m2 = float(((arr - st.mean) ** 2).sum())
        return st

    def merge(self, other: "RunningStats") -> "RunningStats":
        out = RunningStats()
        out.count = self.count + other.count
        if out.count == 0:
            return out
        d = other.mean - self.mean
        out.mean = self.mean + d * other.count / out.count
        out.m2 = self.m2 + other.m2 + d * d * self.count * other.count / out.count
        return out

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    def estimate(self) -> SpreadEstimate:
        if self.count < 1:
            raise ValueError("no samples")
        if self.count == 1:
            return SpreadEstimate(self.mean, math.inf, 1)
        return SpreadEstimate(self.mean, math.sqrt(max(self.variance, 0.0) / self.count), self.count)


def stats_summary(samples) -> SpreadEstimate:
    """Mean, standard error and 95% normal CI of a sample list."""
    st = RunningStats()
    for x in samples:
        st.push(float(x))
    return st.estimate()


# ---------------------------------------------------------------------------
# exact enumeration

def _mask(nodes) -> int:
    m = 0
    for v in nodes:
        m |= 1 << int(v)
    return m


def reach_distribution(g: Graph, seeds) -> dict[int, float]:
    """Exact distribution of the reachable set (as a bitmask) from ``seeds``.

    Coins are enumerated lazily in BFS order: an edge is branched on only
    when its source is active and its target is not, which partitions the
    joint live-edge space into disjoint events.
    """
    return dict(_reach_distribution(g, tuple(sorted(set(int(s) for s in seeds)))))


def _reach_distribution(g: Graph, seeds: tuple) -> tuple:
    cache = g._meta.setdefault("reach_dist", {})
    hit = cache.get(seeds)
    if hit is not None:
        return hit
    out: dict[int, list[float]] = {}
    adj = g._meta.get("adj")
    if adj is None:
        adj = [g.out_adj(u) for u in range(g.n)]
        g._meta["adj"] = adj
    start = _mask(seeds)
    pending0 = tuple(e for s in seeds for e in adj[s])
    stack = [(start, pending0, 1.0)]
    while stack:
        active, pending, prob = stack.pop()
        i = 0
        while i < len(pending) and (active >> pending[i][0]) & 1:
            i += 1
        if i == len(pending):
            out.setdefault(active, []).append(prob)
            continue
        v, p = pending[i]
        rest = pending[i + 1:]
        if p > 0.0:
            stack.append((active | (1 << v), rest + tuple(adj[v]), prob * p))
        if p < 1.0:
            stack.append((active, rest, prob * (1.0 - p)))
    result = tuple((m, math.fsum(ps)) for m, ps in out.items())
    cache[seeds] = result
    return result


def _or_convolve(a: dict, b) -> dict:
    acc: dict[int, list[float]] = {}
    for ma, pa in a.items():
        for mb, pb in b:
            acc.setdefault(ma | mb, []).append(pa * pb)
    return {m: math.fsum(ps) for m, ps in acc.items()}


def _check_cap(g: Graph, T: int, max_coins: int | None) -> None:
    if max_coins is not None and T * g.m > max_coins:
        raise InstanceTooLarge(f"T*m = {T * g.m} exceeds enumeration cap {max_coins}")


def union_distribution(g: Graph, sched: SeedSchedule, max_coins: int | None = 24) -> dict[int, float]:
    """Distribution of the union of per-round reachable sets (bitmask -> prob)."""
    _check_cap(g, sched.T, max_coins)
    dist = {0: 1.0}
    for seeds in sched.rounds:
        if seeds:
            dist = _or_convolve(dist, _reach_distribution(g, seeds))
    return dist


def _popcount(x: int) -> int:
    return bin(x).count("1")


def spread_exact(g: Graph, sched: SeedSchedule, *, excluded=(), max_coins: int | None = 24) -> float:
    """Exact expected size of the union of round reach sets, minus ``excluded``."""
    keep = ~_mask(excluded)
    dist = union_distribution(g, sched, max_coins)
    return math.fsum(p * _popcount(m & keep) for m, p in dist.items())


def weighted_spread_exact(g: Graph, seeds, excluded=(), *, max_coins: int | None = 24) -> float:
    """Exact single-round spread counting only nodes outside ``excluded``."""
    return spread_exact(g, SeedSchedule((tuple(seeds),)), excluded=excluded, max_coins=max_coins)


def adaptive_value_exact(g: Graph, policy, T: int, k: int, *, max_coins: int | None = 24) -> float:
    """Exact expected final activation count of a feedback-deterministic policy.

    Each round's outcome distribution is enumerated exactly and the policy is
    queried on every reachable state.
    """
    from .adaptive import AdaptiveState, RoundRecord

    _check_cap(g, T, max_coins)

    def rec(state: AdaptiveState) -> float:
        if state.t >= T:
            return float(len(state.activated))
        seeds = tuple(sorted(set(int(v) for v in policy(state))))
        if len(seeds) > k:
            raise ValueError(f"policy picked {len(seeds)} seeds, budget {k}")
        acc = []
        for mask, prob in _reach_distribution(g, seeds) if seeds else ((0, 1.0),):
            reached = frozenset(v for v in range(g.n) if (mask >> v) & 1)
            new = reached - state.activated
            nxt = AdaptiveState(
                t=state.t + 1,
                activated=state.activated | reached,
                history=state.history + (RoundRecord(seeds, frozenset(new), len(state.activated | reached)),),
            )
            acc.append(prob * rec(nxt))
        return math.fsum(acc)

    return rec(AdaptiveState(0, frozenset(), ()))


# ---------------------------------------------------------------------------
# Monte Carlo

def seed_csr(rounds) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(rounds) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(s) for s in rounds])
    idx = np.fromiter((v for s in rounds for v in s), dtype=np.int32, count=int(ptr[-1]))
    return ptr, idx


def counted_mask(n: int, excluded=()) -> np.ndarray:
    mask = np.ones(n, dtype=np.uint8)
    ex = np.asarray(list(excluded), dtype=np.int64)
    if ex.size:
        mask[ex] = 0
    return mask


def _chunked(r: int, rng, jobs: int, fn):
    """Run ``fn(count, gen)`` over fixed-size chunks; returns list of outputs.

    The chunk layout depends only on ``r``, so ``jobs`` never changes results.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    rng = as_generator(rng)
    sizes = [MC_CHUNK] * (r // MC_CHUNK) + ([r % MC_CHUNK] if r % MC_CHUNK else [])
    if len(sizes) == 1:
        return [fn(sizes[0], rng)]
    gens = substreams(rng, len(sizes))
    return map_chunks(lambda pair: fn(*pair), list(zip(sizes, gens)), jobs)


def cumulative_spread_mc(g: Graph, sched: SeedSchedule, r: int, rng=None, *, excluded=(),
                         jobs: int = 1) -> list[SpreadEstimate]:
    """Estimates of the cumulative union spread after each round."""
    for s in sched.rounds:
        if s and (s[0] < 0 or s[-1] >= g.n):
            raise ValueError("seed id out of range")
    ptr, idx = seed_csr(sched.rounds)
    counted = counted_mask(g.n, excluded)

    def run(count, gen):
        return kernels.mc_cumulative(g.out_ptr, g.out_idx, g.out_p, ptr, idx, counted, count, gen)

    parts = _chunked(r, rng, jobs, run)
    stats = [RunningStats() for _ in range(sched.T)]
    for part in parts:
        for t in range(sched.T):
            stats[t] = stats[t].merge(RunningStats.of(part[:, t]))
    return [s.estimate() for s in stats]


def spread_mc(g: Graph, sched: SeedSchedule, r: int, rng=None, *, excluded=(), jobs: int = 1) -> SpreadEstimate:
    """Monte-Carlo estimate of the multi-round spread (T fresh live-edge draws per sample)."""
    if sched.T == 0:
        return SpreadEstimate(0.0, 0.0 if r > 1 else math.inf, r)
    return cumulative_spread_mc(g, sched, r, rng, excluded=excluded, jobs=jobs)[-1]


def weighted_spread_mc(g: Graph, seeds, excluded, r: int, rng=None, *, jobs: int = 1) -> SpreadEstimate:
    """Estimate of E|reach(seeds) minus excluded| for one round."""
    return spread_mc(g, SeedSchedule((tuple(seeds),)), r, rng, excluded=excluded, jobs=jobs)


def marginal_samples(g: Graph, sched: SeedSchedule, v: int, t: int, r: int, rng, counted=None) -> np.ndarray:
    """Per-draw gain of adding ``(v, t)``: nodes reached from ``v`` in round ``t``
    that no round already covers. Mean is unbiased for the marginal spread."""
    ptr, idx = seed_csr(sched.rounds)
    if counted is None:
        counted = counted_mask(g.n)
    return kernels.mc_marginal(g.out_ptr, g.out_idx, g.out_p, ptr, idx, int(v), int(t), counted, r,
                               as_generator(rng))
