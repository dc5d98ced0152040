import math

import numpy as np
import pytest

from mrim.graph import Graph, generate_synthetic
from mrim.greedy import (ExactGain, GreedyConfig, MonteCarloGain, cr_greedy, mc_greedy_weighted,
                         single_round_greedy, theoretical_r, wr_greedy)
from mrim.spread import SeedSchedule, spread_exact

import oracles


def _naive_greedy(g, T, k, rounds_order):
    """Plain greedy with full re-evaluation; ``rounds_order`` lists the round sets to search per step."""
    sched = SeedSchedule.empty(T)
    for allowed in rounds_order:
        base = oracles.spread(g, sched.rounds)
        best = None
        for v in range(g.n):
            for t in allowed:
                if (v, t) in sched or len(sched.rounds[t]) >= k:
                    continue
                gain = round(oracles.spread(g, sched.add(v, t).rounds) - base, 10)
                if best is None or gain > best[0]:
                    best = (gain, v, t)
        sched = sched.add(best[1], best[2])
    return sched


@pytest.mark.parametrize("select", [cr_greedy, wr_greedy])
def test_hub_and_isolated(hub_graph, select):
    cfg = GreedyConfig(k=1, T=2, r=200)
    exact = select(hub_graph, cfg, gain=ExactGain(hub_graph))
    mc = select(hub_graph, cfg)
    assert exact.rounds == ((0,), (4,)) == mc.rounds
    assert spread_exact(hub_graph, exact) == 5.0


def test_lazy_matches_naive_greedy():
    rng = np.random.default_rng(3)
    for _ in range(12):
        g = oracles.random_graph(rng, 5, 5, probs=(0.3, 0.5, 0.9))
        T, k = 2, int(rng.integers(1, 3))
        cr = cr_greedy(g, GreedyConfig(k, T), gain=ExactGain(g))
        assert cr == _naive_greedy(g, T, k, [range(T)] * (T * k))
        wr = wr_greedy(g, GreedyConfig(k, T), gain=ExactGain(g))
        assert wr == _naive_greedy(g, T, k, [[t] for t in range(T) for _ in range(k)])


def test_schedules_fill_budget():
    g = generate_synthetic("power_law", 80, scheme="wc", seed=1)
    for select in (cr_greedy, wr_greedy):
        sched = select(g, GreedyConfig(k=3, T=2, r=50, seed=4))
        assert [len(s) for s in sched.rounds] == [3, 3]


def test_same_seed_same_schedule():
    g = generate_synthetic("power_law", 80, scheme="wc", seed=1)
    cfg = GreedyConfig(k=2, T=2, r=100, seed=9)
    assert cr_greedy(g, cfg) == cr_greedy(g, cfg)


def test_zero_probability_picks_lowest_ids():
    g = generate_synthetic("erdos_renyi", 20, avg_deg=2, scheme="constant:0", seed=0)
    assert single_round_greedy(g, 3, 20, 0) == [0, 1, 2]


def test_weighted_greedy_ignores_activated():
    g = Graph.from_edges(3, [0], [1], [1.0])
    # 0 -> 1 certain, 1 already active: seeding 0 gains 1, seeding 2 gains 1; tie -> lower id
    assert mc_greedy_weighted(g, [1], 1, 50, 0) == [0]
    # everything active: every gain is zero, lowest ids win
    assert mc_greedy_weighted(g, [0, 1, 2], 2, 50, 0) == [0, 1]


def test_chain_second_round_is_zero_gain(chain_graph):
    first = mc_greedy_weighted(chain_graph, [], 1, 50, 0, gain=ExactGain(chain_graph))
    assert first == [0]
    second = mc_greedy_weighted(chain_graph, [0, 1, 2], 1, 50, 0, gain=ExactGain(chain_graph, [0, 1, 2]))
    assert second == [0]


def test_gain_oracles_agree():
    g = Graph.from_edges(4, [0, 1, 2], [1, 2, 3], [0.6, 0.5, 0.4])
    sched = SeedSchedule(((0,), ()))
    mc = MonteCarloGain(g, 40000, 5)
    ex = ExactGain(g)
    for v, t in [(2, 0), (2, 1), (0, 1)]:
        assert abs(mc(sched, v, t) - ex(sched, v, t)) < 0.03
    assert mc.calls == 3


def test_config_validation():
    with pytest.raises(ValueError):
        GreedyConfig(k=0)
    with pytest.raises(ValueError):
        GreedyConfig(k=1, r=0)


@pytest.mark.parametrize("n, k, T, eps, ell", [(100, 2, 3, 0.5, 1.0), (1000, 5, 3, 0.1, 1.0), (50, 1, 1, 0.3, 2.0)])
def test_theoretical_r(n, k, T, eps, ell):
    # formula evaluated on the product inside the logarithm
    cross = math.ceil(31 * k * k * T * T * n * math.log(2 * k * n ** (ell + 1)) / eps**2)
    within = math.ceil(31 * k * k * n * math.log(2 * k * n ** (ell + 1) * T) / eps**2)
    assert theoretical_r(n, k, T, eps, ell, "cross") == (cross, False)
    assert theoretical_r(n, k, T, eps, ell, "within") == (within, False)


def test_theoretical_r_pinned_and_saturating():
    assert theoretical_r(100, 2, 3, 0.5, 1.0, "cross").count == 4730338
    # 198400 * ln(40000) = 2102372.33
    assert theoretical_r(100, 2, 2, 0.5, 1.0, "cross").count == 2102373
    big = theoretical_r(10**9, 10**4, 100, 1e-3, 1.0, "cross")
    assert big.saturated
    with pytest.raises(ValueError):
        theoretical_r(10, 1, 1, 0.0, 1.0)
    with pytest.raises(ValueError):
        theoretical_r(10, 1, 1, 0.5, 1.0, "other")
