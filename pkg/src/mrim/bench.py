"""Baselines, experiment runner and presets.

Every algorithm run gets its own selection and evaluation streams derived
from the master seed and the algorithm's position in ``ALGORITHMS``, so a
row never depends on which other algorithms ran alongside it.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .adaptive import AdaGreedyPolicy, AdaIMMPolicy, Environment, estimate_policy_rounds
from .graph import Graph, generate_synthetic
from .greedy import GreedyConfig, cr_greedy, single_round_greedy, wr_greedy
from .imm import cr_naimm, wr_naimm
from .spread import SeedSchedule, SpreadEstimate, cumulative_spread_mc

ALGORITHMS = ("SG", "SG-R", "CR-Greedy", "WR-Greedy", "CR-IMM", "WR-IMM", "AdaGreedy", "AdaIMM",
              "WR-IMM-rej")
ADAPTIVE = ("AdaGreedy", "AdaIMM")
CSV_COLUMNS = ("algorithm", "T", "k", "round", "mean", "ci_lo", "ci_hi", "seconds", "seed")


def baseline_sg(g: Graph, T: int, k: int, r: int = 1000, rng=None) -> SeedSchedule:
    """Single-round greedy for ``T*k`` seeds, cut into rounds in selection order."""
    if T * k > g.n:
        raise ValueError(f"SG needs T*k={T * k} distinct seeds but the graph has {g.n} nodes")
    order = single_round_greedy(g, T * k, r, rng)
    return SeedSchedule(tuple(tuple(order[t * k:(t + 1) * k]) for t in range(T)))


def baseline_sg_r(g: Graph, T: int, k: int, r: int = 1000, rng=None) -> SeedSchedule:
    """One single-round greedy set of ``k`` seeds, reused in every round."""
    seeds = tuple(single_round_greedy(g, k, r, rng))
    return SeedSchedule(tuple(seeds for _ in range(T)))


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    T: int = 5
    k: int = 10
    trials: int = 10000
    adaptive_trials: int = 100
    r: int = 1000
    eps: float = 0.5
    ell: float = 1.0
    seed: int = 0
    jobs: int = 1
    graph_source: str = ""

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.T < 1 or self.k < 1:
            raise ValueError("T and k must be >= 1")
        if self.trials < 1 or self.adaptive_trials < 1 or self.r < 1:
            raise ValueError("trials and r must be >= 1")

    @property
    def adaptive(self) -> bool:
        return self.algorithm in ADAPTIVE

    def streams(self) -> tuple[np.random.Generator, np.random.Generator]:
        """(selection, evaluation) generators for this algorithm."""
        ss = np.random.SeedSequence([self.seed, ALGORITHMS.index(self.algorithm), self.T, self.k])
        a, b = ss.spawn(2)
        return np.random.default_rng(a), np.random.default_rng(b)


@dataclass
class ResultRow:
    algorithm: str
    T: int
    k: int
    round: int
    mean: float
    ci_lo: float
    ci_hi: float
    seconds: float | None
    seed: int

    def csv_fields(self) -> list[str]:
        secs = "" if self.seconds is None else f"{self.seconds:.3f}"
        return [self.algorithm, str(self.T), str(self.k), str(self.round), f"{self.mean:.4f}",
                f"{self.ci_lo:.4f}", f"{self.ci_hi:.4f}", secs, str(self.seed)]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    schedule: SeedSchedule | None = None
    estimates: list = field(default_factory=list)

    @property
    def final(self) -> SpreadEstimate:
        return self.estimates[-1]


def select_schedule(g: Graph, cfg: ExperimentConfig, rng) -> SeedSchedule:
    """Run a non-adaptive algorithm."""
    a, T, k = cfg.algorithm, cfg.T, cfg.k
    if a == "SG":
        return baseline_sg(g, T, k, cfg.r, rng)
    if a == "SG-R":
        return baseline_sg_r(g, T, k, cfg.r, rng)
    if a == "CR-Greedy":
        return cr_greedy(g, GreedyConfig(k, T, cfg.r), rng=rng)
    if a == "WR-Greedy":
        return wr_greedy(g, GreedyConfig(k, T, cfg.r), rng=rng)
    if a == "CR-IMM":
        return cr_naimm(g, T, k, cfg.eps, cfg.ell, rng)
    if a == "WR-IMM":
        return wr_naimm(g, T, k, cfg.eps, cfg.ell, rng)
    if a == "WR-IMM-rej":
        return wr_naimm(g, T, k, cfg.eps, cfg.ell, rng, roots="rejection")
    raise ValueError(f"{a} is adaptive; it has no fixed schedule")


def make_policy(g: Graph, cfg: ExperimentConfig, rng):
    if cfg.algorithm == "AdaGreedy":
        return AdaGreedyPolicy(g, cfg.k, cfg.r, rng)
    return AdaIMMPolicy(g, cfg.k, cfg.T, cfg.eps, cfg.ell, rng)


def run_experiment(g: Graph, cfg: ExperimentConfig, *, timing: bool = True) -> ExperimentResult:
    """Select (or play adaptively) and estimate per-round cumulative spread.

    ``seconds`` is the selection time for non-adaptive algorithms and the mean
    time of one adaptive run (all ``T`` rounds) otherwise.
    """
    sel_rng, eval_rng = cfg.streams()
    start = time.perf_counter()
    sched = None
    if cfg.adaptive:
        env = Environment.sampled(g, cfg.T)
        policy = make_policy(g, cfg, None)
        ests = estimate_policy_rounds(env, policy, cfg.adaptive_trials, sel_rng, k=cfg.k, jobs=cfg.jobs)
        seconds = (time.perf_counter() - start) / cfg.adaptive_trials
    else:
        sched = select_schedule(g, cfg, sel_rng)
        seconds = time.perf_counter() - start
        ests = cumulative_spread_mc(g, sched, cfg.trials, eval_rng, jobs=cfg.jobs)
    rows = []
    for t, est in enumerate(ests):
        lo, hi = est.ci95
        rows.append(ResultRow(cfg.algorithm, cfg.T, cfg.k, t + 1, est.mean, lo, hi,
                              seconds if timing else None, cfg.seed))
    return ExperimentResult(cfg, rows, sched, ests)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow(row.csv_fields())
    return buf.getvalue()


def rows_to_json(rows, meta: dict | None = None) -> str:
    payload = {"columns": list(CSV_COLUMNS), "rows": [asdict(r) for r in rows]}
    if meta:
        payload["meta"] = meta
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# presets: synthetic stand-ins for the real datasets

@dataclass(frozen=True)
class Preset:
    name: str
    graph: dict
    algorithms: tuple
    shapes: tuple            # (T, k) pairs
    trials: int = 10000
    adaptive_trials: int = 100
    r: int = 1000
    description: str = ""

    def build_graph(self, seed: int) -> Graph:
        opts = dict(self.graph)
        kind = opts.pop("kind")
        n = opts.pop("n")
        return generate_synthetic(kind, n, seed=seed, **opts)

    def configs(self, seed: int = 0, jobs: int = 1, **overrides) -> list[ExperimentConfig]:
        out = []
        for T, k in self.shapes:
            for a in self.algorithms:
                base = ExperimentConfig(a, T, k, self.trials, self.adaptive_trials, self.r, seed=seed,
                                        jobs=jobs, graph_source=f"preset:{self.name}")
                out.append(replace(base, **overrides))
        return out


PRESETS = {
    "table": Preset(
        "table", {"kind": "power_law", "n": 2000, "scheme": "wc"},
        ("SG", "SG-R", "CR-IMM", "WR-IMM", "AdaIMM"), ((5, 10),),
        description="baseline ordering on a 2000-node scale-free WC graph"),
    "adaptiveness": Preset(
        "adaptiveness", {"kind": "power_law", "n": 500, "scheme": "wc"},
        ("AdaIMM",), ((1, 8), (2, 4), (4, 2), (8, 1)),
        description="fixed budget T*k=8 split into more or fewer rounds"),
    "runtime": Preset(
        "runtime", {"kind": "power_law", "n": 1000, "scheme": "wc"},
        ("WR-Greedy", "WR-IMM", "CR-IMM"), ((3, 5),), trials=1000,
        description="selection wall-clock of greedy against RR-set selection"),
    "wr-gap": Preset(
        "wr-gap", {"kind": "erdos_renyi", "n": 200, "avg_deg": 3.0, "scheme": "wc"},
        ("WR-IMM", "WR-IMM-rej"), ((4, 3),),
        description="remaining-roots sampling against rejection sampling"),
    "smoke": Preset(
        "smoke", {"kind": "power_law", "n": 150, "scheme": "wc"},
        ALGORITHMS, ((2, 2),), trials=500, adaptive_trials=10, r=50,
        description="every algorithm on a tiny graph"),
}


def run_preset(name: str, seed: int = 0, *, jobs: int = 1, timing: bool = True, graph: Graph | None = None,
               algorithms=None, **overrides) -> list[ExperimentResult]:
    preset = PRESETS[name]
    g = graph if graph is not None else preset.build_graph(seed)
    results = []
    for cfg in preset.configs(seed, jobs, **overrides):
        if algorithms and cfg.algorithm not in algorithms:
            continue
        results.append(run_experiment(g, cfg, timing=timing))
    return results
