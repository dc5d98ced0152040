"""Live-edge sampling and forward propagation under independent cascade."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .graph import Graph
from .rng import as_generator


@dataclass(frozen=True)
class LiveEdgeSample:
    """One live-edge graph, stored as a mask over the out-CSR edge slots."""

    live: np.ndarray
    rng_seed: int | None = None

    def triggering_set(self, g: Graph, v: int) -> list[int]:
        """In-neighbours ``u`` of ``v`` whose edge ``(u, v)`` is live."""
        a, b = g.in_ptr[v], g.in_ptr[v + 1]
        mask = self.live[g.in_eid[a:b]]
        return g.in_idx[a:b][mask].tolist()

    def live_edges(self, g: Graph) -> list[tuple[int, int]]:
        src, dst, _ = g.edges()
        return list(zip(src[self.live].tolist(), dst[self.live].tolist()))


@dataclass(frozen=True)
class PropagationResult:
    activated: frozenset
    per_step: tuple | None = None

    def __len__(self) -> int:
        return len(self.activated)


def _check_seeds(g: Graph, seeds) -> np.ndarray:
    arr = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if len(arr) and (arr[0] < 0 or arr[-1] >= g.n):
        raise ValueError(f"seed id outside 0..{g.n - 1}")
    return arr


def sample_live_edges(g: Graph, rng=None) -> LiveEdgeSample:
    """Draw a live-edge graph: each edge is live independently with its probability."""
    seed = rng if isinstance(rng, (int, np.integer)) else None
    gen = as_generator(rng)
    live = gen.random(g.m) < g.out_p
    live.flags.writeable = False
    return LiveEdgeSample(live=live, rng_seed=None if seed is None else int(seed))


def forward_propagate(g: Graph, sample: LiveEdgeSample, seeds, *, trace: bool = False) -> PropagationResult:
    """Nodes reachable from ``seeds`` along live edges (BFS)."""
    arr = _check_seeds(g, seeds)
    active = np.zeros(g.n, dtype=bool)
    active[arr] = True
    frontier = arr.tolist()
    steps = [tuple(frontier)] if trace else None
    queue = deque(frontier)
    depth = {v: 0 for v in frontier}
    while queue:
        u = queue.popleft()
        for e in range(g.out_ptr[u], g.out_ptr[u + 1]):
            v = int(g.out_idx[e])
            if sample.live[e] and not active[v]:
                active[v] = True
                depth[v] = depth[u] + 1
                queue.append(v)
    result = frozenset(np.flatnonzero(active).tolist())
    if trace:
        steps = _layers(depth)
    return PropagationResult(result, steps)


def _layers(depth: dict) -> tuple:
    if not depth:
        return ()
    out = [[] for _ in range(max(depth.values()) + 1)]
    for v, d in depth.items():
        out[d].append(v)
    return tuple(tuple(sorted(layer)) for layer in out)


def simulate_round(g: Graph, seeds, rng=None, *, trace: bool = False) -> PropagationResult:
    """One diffusion with coins flipped lazily as the BFS touches edges."""
    arr = _check_seeds(g, seeds)
    nodes, depth = kernels.reach_once(g.out_ptr, g.out_idx, g.out_p, arr, as_generator(rng))
    steps = _layers(dict(zip(nodes.tolist(), depth.tolist()))) if trace else None
    return PropagationResult(frozenset(nodes.tolist()), steps)
