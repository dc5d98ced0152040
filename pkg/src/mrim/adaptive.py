"""Adaptive multi-round seeding: environments, policies and the run loop.

A policy sees the round index and the set of nodes activated so far, and
returns that round's seeds. The environment then reveals which nodes the
seeds reached in a fresh (or pinned) live-edge graph.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .greedy import ExactGain, mc_greedy_weighted
from .imm import ada_imm_round
from .propagation import LiveEdgeSample, forward_propagate, simulate_round
from .rng import as_generator, map_chunks, substreams
from .spread import RunningStats, SeedSchedule, SpreadEstimate


class BudgetViolation(ValueError):
    pass


@dataclass(frozen=True)
class RoundRecord:
    seeds: tuple
    new_activated: frozenset
    cumulative: int


@dataclass(frozen=True)
class AdaptiveState:
    t: int
    activated: frozenset
    history: tuple = ()


@dataclass
class Environment:
    """Round outcomes: fresh live-edge draws, or a fixed list of ``T`` samples."""

    g: Graph
    T: int
    samples: tuple | None = None
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.samples is not None and len(self.samples) != self.T:
            raise ValueError(f"fixed realization needs {self.T} samples, got {len(self.samples)}")
        if self.samples is None:
            self.rng = as_generator(self.rng)

    @classmethod
    def sampled(cls, g: Graph, T: int, rng=None) -> "Environment":
        return cls(g, T, None, as_generator(rng))

    @classmethod
    def fixed(cls, g: Graph, samples) -> "Environment":
        samples = tuple(samples)
        if not all(isinstance(s, LiveEdgeSample) for s in samples):
            raise TypeError("fixed realization takes LiveEdgeSample objects")
        return cls(g, len(samples), samples)

    def reseeded(self, rng) -> "Environment":
        return self if self.samples is not None else Environment.sampled(self.g, self.T, rng)

    def realize(self, t: int, seeds) -> frozenset:
        if self.samples is not None:
            return forward_propagate(self.g, self.samples[t], seeds).activated
        return simulate_round(self.g, seeds, self.rng).activated


class AdaGreedyPolicy:
    """Greedy on spread counted over not-yet-activated nodes, re-run each round."""

    def __init__(self, g: Graph, k: int, r: int = 1000, rng=None, *, exact: bool = False):
        self.g, self.k, self.r, self.exact = g, k, r, exact
        self.rng = as_generator(rng)

    def with_rng(self, rng) -> "AdaGreedyPolicy":
        return AdaGreedyPolicy(self.g, self.k, self.r, rng, exact=self.exact)

    def __call__(self, state: AdaptiveState) -> list[int]:
        if len(state.activated) >= self.g.n:
            return list(range(min(self.k, self.g.n)))
        gain = ExactGain(self.g, state.activated) if self.exact else None
        return mc_greedy_weighted(self.g, state.activated, self.k, self.r, self.rng, gain=gain)


class AdaIMMPolicy:
    """RR-set selection over non-activated roots, re-run each round."""

    def __init__(self, g: Graph, k: int, T: int, eps: float = 0.5, ell: float = 1.0, rng=None, *,
                 reuse: bool = False, max_bytes: int | None = None):
        self.g, self.k, self.T, self.eps, self.ell = g, k, T, eps, ell
        self.reuse, self.max_bytes = reuse, max_bytes
        self.rng = as_generator(rng)
        self._last = None
        self.states = []

    def with_rng(self, rng) -> "AdaIMMPolicy":
        return AdaIMMPolicy(self.g, self.k, self.T, self.eps, self.ell, rng,
                            reuse=self.reuse, max_bytes=self.max_bytes)

    def __call__(self, state: AdaptiveState) -> list[int]:
        res = ada_imm_round(self.g, state.activated, self.T, self.k, self.eps, self.ell, self.rng,
                            reuse=self._last if self.reuse else None, max_bytes=self.max_bytes)
        self._last = res.collection
        self.states.append(res.state)
        return res.seeds


def ada_greedy_policy(g: Graph, k: int, r: int = 1000, rng=None, *, exact: bool = False) -> AdaGreedyPolicy:
    return AdaGreedyPolicy(g, k, r, rng, exact=exact)


def ada_imm_policy(g: Graph, k: int, eps: float, ell: float, T: int, rng=None, **kw) -> AdaIMMPolicy:
    return AdaIMMPolicy(g, k, T, eps, ell, rng, **kw)


@dataclass
class PolicyRun:
    schedule: SeedSchedule
    activated: frozenset
    trace: list = field(default_factory=list)

    @property
    def value(self) -> int:
        return len(self.activated)

    def to_jsonl(self, labels=None) -> str:
        lab = (lambda v: v) if labels is None else (lambda v: int(labels[v]))
        lines = [json.dumps({"round": i + 1, "seeds": [lab(v) for v in rec.seeds],
                             "new": len(rec.new_activated), "cumulative": rec.cumulative})
                 for i, rec in enumerate(self.trace)]
        return "\n".join(lines) + ("\n" if lines else "")


def run_policy(env: Environment, policy, T: int | None = None, k: int | None = None) -> PolicyRun:
    """Play ``policy`` for ``T`` rounds against ``env``."""
    T = env.T if T is None else T
    if T > env.T:
        raise ValueError(f"environment covers {env.T} rounds, asked for {T}")
    state = AdaptiveState(0, frozenset(), ())
    rounds = []
    for t in range(T):
        seeds = tuple(sorted({int(v) for v in policy(state)}))
        if k is not None and len(seeds) > k:
            raise BudgetViolation(f"round {t + 1}: policy chose {len(seeds)} seeds, budget is {k}")
        if seeds and (seeds[0] < 0 or seeds[-1] >= env.g.n):
            raise ValueError(f"round {t + 1}: seed id out of range")
        reached = env.realize(t, seeds)
        new = reached - state.activated
        act = state.activated | reached
        state = AdaptiveState(t + 1, act, state.history + (RoundRecord(seeds, frozenset(new), len(act)),))
        rounds.append(seeds)
    return PolicyRun(SeedSchedule(tuple(rounds)), state.activated, list(state.history))


def _fresh(policy, rng):
    return policy.with_rng(rng) if hasattr(policy, "with_rng") else policy


def estimate_policy_rounds(env: Environment, policy, trials: int, rng=None, *, k: int | None = None,
                           jobs: int = 1) -> list[SpreadEstimate]:
    """Per-round estimates of the cumulative activation count over ``trials`` runs.

    Each trial gets its own environment stream and policy stream, so results
    do not depend on ``jobs``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    streams = substreams(rng, trials)

    def one(gen):
        env_rng, pol_rng = gen.spawn(2)
        run = run_policy(env.reseeded(env_rng), _fresh(policy, pol_rng), env.T, k)
        return [rec.cumulative for rec in run.trace]

    rows = np.array(map_chunks(one, streams, jobs), dtype=np.float64).reshape(trials, env.T)
    return [RunningStats.of(rows[:, t]).estimate() for t in range(env.T)]


def estimate_policy_value(env: Environment, policy, trials: int, rng=None, **kw) -> SpreadEstimate:
    """Mean final activation count of ``policy`` over independent realizations."""
    return estimate_policy_rounds(env, policy, trials, rng, **kw)[-1]
