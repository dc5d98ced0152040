"""Greedy seed selection driven by a marginal-gain oracle.

``cr_greedy`` searches all (node, round) pairs at every step and closes a
round once it holds ``k`` seeds; ``wr_greedy`` fills rounds one after the
other; ``mc_greedy_weighted`` is the single-round selector used by the
adaptive policy, ignoring already-activated nodes. All three use lazy (CELF)
re-evaluation. Ties go to the lower node id, then the lower round.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import Graph
from .rng import as_generator
from .spread import SeedSchedule, counted_mask, marginal_samples, spread_exact


@dataclass(frozen=True)
class GreedyConfig:
    k: int
    T: int = 1
    r: int = 1000
    seed: int | None = 0

    def __post_init__(self):
        if self.k < 1 or self.T < 1 or self.r < 1:
            raise ValueError("k, T and r must all be >= 1")


class MonteCarloGain:
    """Marginal gain estimated from ``r`` paired draws per query."""

    def __init__(self, g: Graph, r: int, rng=None, excluded=()):
        self.g = g
        self.r = r
        self.rng = as_generator(rng)
        self.counted = counted_mask(g.n, excluded)
        self.calls = 0

    def __call__(self, sched: SeedSchedule, v: int, t: int) -> float:
        self.calls += 1
        return float(marginal_samples(self.g, sched, v, t, self.r, self.rng, self.counted).mean())


class ExactGain:
    """Marginal gain from exact enumeration; for tiny graphs only."""

    def __init__(self, g: Graph, excluded=(), max_coins: int | None = None):
        self.g = g
        self.excluded = tuple(excluded)
        self.max_coins = max_coins
        self._base: tuple | None = None
        self.calls = 0

    def _spread(self, sched):
        return spread_exact(self.g, sched, excluded=self.excluded, max_coins=self.max_coins)

    def __call__(self, sched: SeedSchedule, v: int, t: int) -> float:
        self.calls += 1
        if self._base is None or self._base[0] != sched:
            self._base = (sched, self._spread(sched))
        # rounding keeps exact ties tied despite summation order
        return round(self._spread(sched.add(v, t)) - self._base[1], 10)


def _lazy_greedy(n: int, rounds: list[int], T: int, k: int, steps: int, gain, sched: SeedSchedule):
    """CELF over pairs (v, t) for t in ``rounds``; returns (schedule, pick order, gains)."""
    counts = [len(s) for s in sched.rounds]
    closed = {t for t in rounds if counts[t] >= k}
    heap = []
    for v in range(n):
        for t in rounds:
            if t in closed or (v, t) in sched:
                continue
            heap.append((-gain(sched, v, t), v, t, 0))
    heapq.heapify(heap)
    order, gains = [], []
    it = 0
    while len(order) < steps and heap:
        neg, v, t, stamp = heapq.heappop(heap)
        if t in closed:
            continue
        if stamp != it:
            heapq.heappush(heap, (-gain(sched, v, t), v, t, it))
            continue
        sched = sched.add(v, t)
        order.append((v, t))
        gains.append(-neg)
        counts[t] += 1
        if counts[t] >= k:
            closed.add(t)
        it += 1
    return sched, order, gains


def cr_greedy(g: Graph, cfg: GreedyConfig, *, gain=None, rng=None) -> SeedSchedule:
    """Cross-round greedy: ``k*T`` steps over all open (node, round) pairs."""
    if gain is None:
        gain = MonteCarloGain(g, cfg.r, cfg.seed if rng is None else rng)
    sched, _, _ = _lazy_greedy(g.n, list(range(cfg.T)), cfg.T, cfg.k, cfg.k * cfg.T, gain,
                               SeedSchedule.empty(cfg.T))
    return sched


def wr_greedy(g: Graph, cfg: GreedyConfig, *, gain=None, rng=None) -> SeedSchedule:
    """Within-round greedy: ``k`` steps in round 0, then round 1, and so on."""
    if gain is None:
        gain = MonteCarloGain(g, cfg.r, cfg.seed if rng is None else rng)
    sched = SeedSchedule.empty(cfg.T)
    for t in range(cfg.T):
        sched, _, _ = _lazy_greedy(g.n, [t], cfg.T, cfg.k, cfg.k, gain, sched)
    return sched


def mc_greedy_weighted(g: Graph, excluded, k: int, r: int, rng=None, *, gain=None) -> list[int]:
    """``k`` seeds greedily maximizing spread over nodes outside ``excluded``.

    Returned in selection order. Zero-gain slots fall to the lowest unused ids.
    """
    k = min(k, g.n)
    if gain is None:
        gain = MonteCarloGain(g, r, rng, excluded)
    _, order, _ = _lazy_greedy(g.n, [0], 1, k, k, gain, SeedSchedule.empty(1))
    return [v for v, _ in order]


def single_round_greedy(g: Graph, k: int, r: int, rng=None, *, gain=None) -> list[int]:
    """Classic greedy for one round, in selection order."""
    return mc_greedy_weighted(g, (), k, r, rng, gain=gain)


class RCount(NamedTuple):
    count: int
    saturated: bool


_INT_MAX = np.iinfo(np.int64).max


def theoretical_r(n: int, k: int, T: int, eps: float, ell: float, variant: str = "cross") -> RCount:
    """Simulation count under which greedy keeps its approximation guarantee (natural log).

    cross:  ceil(31 k^2 T^2 n ln(2k n^(l+1)) / eps^2)
    within: ceil(31 k^2 n ln(2k n^(l+1) T) / eps^2)
    """
    if eps <= 0 or ell <= 0:
        raise ValueError("eps and ell must be positive")
    log_term = math.log(2 * k) + (ell + 1) * math.log(n)
    if variant == "cross":
        value = 31 * k**2 * T**2 * n * log_term / eps**2
    elif variant == "within":
        value = 31 * k**2 * n * (log_term + math.log(T)) / eps**2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not math.isfinite(value) or value >= _INT_MAX:
        return RCount(int(_INT_MAX), True)
    return RCount(max(1, math.ceil(value)), False)
