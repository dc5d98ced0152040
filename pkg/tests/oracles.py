"""Independent brute-force references used by the tests.

Nothing here calls into the package's exact evaluator or kernels: spreads
are computed by enumerating every live/blocked assignment of every edge in
every round, and coverage optima by exhaustive search.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from mrim.graph import Graph


def _edge_list(g: Graph):
    src, dst, p = g.edges()
    return list(zip(src.tolist(), dst.tolist(), p.tolist()))


def _reach(n, live_edges, seeds):
    adj = [[] for _ in range(n)]
    for u, v in live_edges:
        adj[u].append(v)
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def live_worlds(g: Graph):
    """All (probability, live edge list) pairs for one round."""
    edges = _edge_list(g)
    for bits in itertools.product((0, 1), repeat=len(edges)):
        prob = 1.0
        live = []
        for b, (u, v, p) in zip(bits, edges):
            prob *= p if b else 1 - p
            if b:
                live.append((u, v))
        if prob > 0:
            yield prob, live


def reach_distribution(g: Graph, seeds) -> dict:
    """frozenset(reached) -> probability, for one round from ``seeds``."""
    out: dict = {}
    for prob, live in live_worlds(g):
        key = frozenset(_reach(g.n, live, seeds))
        out[key] = out.get(key, 0.0) + prob
    return out


def spread(g: Graph, rounds, excluded=()) -> float:
    """E|union of per-round reach sets minus ``excluded``| by full enumeration."""
    ex = set(excluded)
    dists = [reach_distribution(g, s) if s else {frozenset(): 1.0} for s in rounds]
    total = []
    for combo in itertools.product(*(d.items() for d in dists)):
        prob = math.prod(p for _, p in combo)
        union = frozenset().union(*(s for s, _ in combo))
        total.append(prob * len(union - ex))
    return math.fsum(total)


def rr_hit_probability(g: Graph, rounds) -> float:
    """P(multi-round RR set from a uniform root meets the schedule), enumerated on reversed reachability."""
    T = len(rounds)
    hits = []
    worlds = list(live_worlds(g))
    for root in range(g.n):
        for combo in itertools.product(worlds, repeat=T):
            prob = math.prod(w[0] for w in combo)
            hit = False
            for t, (_, live) in enumerate(combo):
                rev = [(v, u) for u, v in live]
                if _reach(g.n, rev, [root]) & set(rounds[t]):
                    hit = True
                    break
            if hit:
                hits.append(prob)
    return math.fsum(hits) / g.n


def all_schedules(n: int, T: int, k: int):
    per_round = list(itertools.combinations(range(n), k))
    return itertools.product(per_round, repeat=T)


def optimal_spread(g: Graph, T: int, k: int, value=None) -> float:
    value = value or (lambda rounds: spread(g, rounds))
    return max(value(r) for r in all_schedules(g.n, T, k))


def coverage(sets, items) -> int:
    chosen = set(items)
    return sum(1 for s in sets if chosen & set(s))


def optimal_partition_cover(sets, n_items: int, T: int, k: int) -> int:
    """Best coverage using at most ``k`` items from each round class (item % T)."""
    classes = [[x for x in range(n_items) if x % T == t] for t in range(T)]
    useful = [[x for x in cls if any(x in s for s in sets)] for cls in classes]
    options = [list(itertools.combinations(u, min(k, len(u)))) for u in useful]
    best = 0
    for combo in itertools.product(*options):
        best = max(best, coverage(sets, [x for part in combo for x in part]))
    return best


def optimal_k_cover(sets, k: int) -> int:
    items = sorted({x for s in sets for x in s})
    if len(items) <= k:
        return coverage(sets, items)
    return max(coverage(sets, c) for c in itertools.combinations(items, k))


def recount(sets, covered, n_items: int) -> np.ndarray:
    """Count of uncovered sets containing each item, from scratch."""
    counts = np.zeros(n_items, dtype=np.int64)
    for s, c in zip(sets, covered):
        if not c:
            for x in s:
                counts[x] += 1
    return counts


def random_graph(rng: np.random.Generator, n: int, m: int, probs=(0.2, 0.5, 0.8, 1.0)) -> Graph:
    """Random simple digraph with exactly ``m`` edges (no self-loops)."""
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    pick = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    src = [pairs[i][0] for i in pick]
    dst = [pairs[i][1] for i in pick]
    p = rng.choice(probs, size=len(pick))
    return Graph.from_edges(n, src, dst, p)
