"""Command-line interface: ``mrim <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 bad input, 3 resource cap hit.
Rounds are numbered from 1 in all files and on the command line.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adaptive import Environment, estimate_policy_rounds, run_policy
from .bench import (ADAPTIVE, ALGORITHMS, PRESETS, ExperimentConfig, ResultRow, make_policy,
                    rows_to_csv, rows_to_json, run_experiment, select_schedule)
from .graph import EdgeListError, Graph, WeightScheme, generate_synthetic, load_edge_list, serialize_edge_list
from .rrset import ResourceLimitError, estimate_spread_rr
from .spread import InstanceTooLarge, SeedSchedule, cumulative_spread_mc, spread_exact

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _scheme(text):
    try:
        return WeightScheme.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p, *, graph=True, shape=True, seed=True, out=True):
    if graph:
        p.add_argument("--graph", required=True, help="edge list file ('u v [p]' per line)")
        p.add_argument("--scheme", type=_scheme, default=WeightScheme("file"),
                       help="edge weights: file, wc, constant:P or trivalency[:SEED] (default file)")
    if shape:
        p.add_argument("-T", type=_positive(int), default=5, help="number of rounds (default 5)")
        p.add_argument("-k", type=_positive(int), default=10, help="seeds per round (default 10)")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--jobs", type=_positive(int), default=1, help="worker threads (default 1)")
    if out:
        p.add_argument("--out", choices=("csv", "json"), default="csv", help="output format")
        p.add_argument("--output", "-o", help="write to this file instead of stdout")


def _algo_params(p, *, r_default=1000):
    p.add_argument("--eps", type=float, default=0.5, help="RR-set accuracy epsilon (default 0.5)")
    p.add_argument("--ell", type=_positive(float), default=1.0, help="RR-set confidence ell (default 1)")
    p.add_argument("-r", type=_positive(int), default=r_default,
                   help=f"Monte Carlo draws per greedy gain query (default {r_default})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mrim", description="Multi-round influence maximization toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-graph", help="write a seeded synthetic graph as an edge list")
    p.add_argument("--kind", choices=("erdos_renyi", "power_law"), default="power_law")
    p.add_argument("-n", type=_positive(int), required=True, help="node count")
    p.add_argument("--avg-deg", type=float, default=4.0)
    p.add_argument("--exponent", type=float, default=2.5, help="power-law degree exponent")
    p.add_argument("--scheme", type=_scheme, default=WeightScheme("wc"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help="file to write (default stdout)")

    p = sub.add_parser("spread", help="estimate the spread of a seed schedule")
    _common(p, shape=False)
    p.add_argument("--schedule", required=True, help="'node@round,...' or a JSON file written by 'select'")
    p.add_argument("-T", type=_positive(int), help="rounds (default: largest round in the schedule)")
    p.add_argument("--method", choices=("mc", "rr", "exact"), default="mc")
    p.add_argument("--trials", type=_positive(int), default=10000, help="Monte Carlo or RR samples")
    p.add_argument("--max-coins", type=int, default=24, help="exact method: cap on T*m")

    p = sub.add_parser("select", help="run one selection algorithm")
    _common(p)
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    _algo_params(p)

    p = sub.add_parser("adaptive", help="play an adaptive policy against sampled realizations")
    _common(p)
    p.add_argument("--algo", choices=ADAPTIVE, default="AdaIMM")
    _algo_params(p)
    p.add_argument("--trials", type=_positive(int), default=100, help="independent realizations")
    p.add_argument("--trace", help="write a JSON-lines trace of one run to this file")

    p = sub.add_parser("bench", help="run a preset experiment suite")
    _common(p, graph=False, shape=False)
    p.add_argument("--preset", choices=sorted(PRESETS), default="table")
    p.add_argument("--graph", help="use this edge list instead of the preset's synthetic graph")
    p.add_argument("--scheme", type=_scheme, default=WeightScheme("file"))
    p.add_argument("--algo", help="comma-separated subset of the preset's algorithms")
    p.add_argument("-T", type=_positive(int), help="override rounds (needs -k too)")
    p.add_argument("-k", type=_positive(int), help="override seeds per round (needs -T too)")
    p.add_argument("--trials", type=_positive(int), help="evaluation draws (non-adaptive)")
    p.add_argument("--adaptive-trials", type=_positive(int), help="realizations (adaptive)")
    p.add_argument("--eps", type=float)
    p.add_argument("--ell", type=_positive(float))
    p.add_argument("-r", type=_positive(int))
    p.add_argument("--timing", choices=("wall", "none"), default="wall",
                   help="'none' leaves the seconds column empty so output is byte-reproducible")

    p = sub.add_parser("oracle", help="exact enumeration on tiny graphs")
    _common(p, seed=False, out=False)
    p.add_argument("--schedule", help="exact spread of this schedule")
    p.add_argument("--opt", action="store_true", help="brute-force the optimal schedule")
    p.add_argument("--max-coins", type=int, default=24, help="cap on T*m")
    return parser


# ---------------------------------------------------------------------------
# helpers

def _load_graph(args) -> Graph:
    return load_edge_list(args.graph, args.scheme)


def _index_of(g: Graph, label: int) -> int:
    if g.labels is None:
        if not 0 <= label < g.n:
            raise ValueError(f"node {label} not in graph")
        return label
    pos = int(np.searchsorted(g.labels, label))
    if pos >= g.n or int(g.labels[pos]) != label:
        raise ValueError(f"node {label} not in graph")
    return pos


def parse_schedule(text: str, g: Graph, T: int | None = None) -> SeedSchedule:
    """Schedule from 'node@round,...' (1-based rounds, file labels) or a select JSON file."""
    pairs = []
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        data = json.loads(path.read_text())
        sched = data.get("schedule", data)
        for t, seeds in enumerate(sched["rounds"]):
            pairs.extend((int(v), t + 1) for v in seeds)
        T = T or int(sched["T"])
    else:
        for item in filter(None, (s.strip() for s in text.split(","))):
            node, sep, rnd = item.partition("@")
            if not sep:
                raise ValueError(f"schedule entry {item!r} must look like node@round")
            pairs.append((int(node), int(rnd)))
    if T is None:
        T = max((t for _, t in pairs), default=1)
    for _, t in pairs:
        if not 1 <= t <= T:
            raise ValueError(f"round {t} outside 1..{T}")
    return SeedSchedule.from_pairs([(_index_of(g, v), t - 1) for v, t in pairs], T)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _schedule_payload(g: Graph, sched: SeedSchedule, meta: dict) -> dict:
    return {**meta, "schedule": sched.to_json(g.labels)}


def _schedule_csv(g: Graph, sched: SeedSchedule) -> str:
    lines = ["node,round"]
    for t, seeds in enumerate(sched.rounds):
        lines.extend(f"{g.label(v)},{t + 1}" for v in seeds)
    return "\n".join(lines) + "\n"


def _estimate_rows(algorithm, T, k, seed, ests) -> list[ResultRow]:
    return [ResultRow(algorithm, T, k, t + 1, e.mean, *e.ci95, None, seed) for t, e in enumerate(ests)]


# ---------------------------------------------------------------------------
# commands

def cmd_gen_graph(args) -> int:
    g = generate_synthetic(args.kind, args.n, avg_deg=args.avg_deg, exponent=args.exponent,
                           scheme=args.scheme, seed=args.seed)
    _emit(serialize_edge_list(g), args.output)
    return EXIT_OK


def cmd_spread(args) -> int:
    g = _load_graph(args)
    sched = parse_schedule(args.schedule, g, args.T)
    if args.method == "exact":
        value = spread_exact(g, sched, max_coins=args.max_coins)
        ests = None
        rows = [ResultRow("exact", sched.T, max(map(len, sched.rounds)), sched.T, value, value, value, None, args.seed)]
    elif args.method == "rr":
        est = estimate_spread_rr(g, sched, args.trials, args.seed)
        rows = _estimate_rows("rr", sched.T, max(map(len, sched.rounds)), args.seed, [est])
        rows[0].round = sched.T
    else:
        ests = cumulative_spread_mc(g, sched, args.trials, args.seed, jobs=args.jobs)
        rows = _estimate_rows("mc", sched.T, max(map(len, sched.rounds)), args.seed, ests)
    text = rows_to_csv(rows) if args.out == "csv" else rows_to_json(rows)
    _emit(text, args.output)
    return EXIT_OK


def _config(args, algorithm, **extra) -> ExperimentConfig:
    return ExperimentConfig(algorithm, args.T, args.k, r=args.r, eps=args.eps, ell=args.ell, seed=args.seed,
                            jobs=args.jobs, graph_source=str(args.graph), **extra)


def cmd_select(args) -> int:
    g = _load_graph(args)
    cfg = _config(args, args.algo)
    sel_rng, eval_rng = cfg.streams()
    if cfg.adaptive:
        env = Environment.sampled(g, cfg.T, eval_rng)
        run = run_policy(env, make_policy(g, cfg, sel_rng), cfg.T, cfg.k)
        sched, extra = run.schedule, {"activated": run.value}
    else:
        sched, extra = select_schedule(g, cfg, sel_rng), {}
    meta = {"algorithm": cfg.algorithm, "T": cfg.T, "k": cfg.k, "seed": cfg.seed, **extra}
    if args.out == "json":
        text = json.dumps(_schedule_payload(g, sched, meta), indent=2, sort_keys=True) + "\n"
    else:
        text = _schedule_csv(g, sched)
    _emit(text, args.output)
    return EXIT_OK


def cmd_adaptive(args) -> int:
    g = _load_graph(args)
    cfg = _config(args, args.algo, adaptive_trials=args.trials)
    sel_rng, eval_rng = cfg.streams()
    env = Environment.sampled(g, cfg.T)
    ests = estimate_policy_rounds(env, make_policy(g, cfg, None), args.trials, sel_rng, k=cfg.k, jobs=cfg.jobs)
    rows = _estimate_rows(cfg.algorithm, cfg.T, cfg.k, cfg.seed, ests)
    if args.trace:
        env_rng, pol_rng = eval_rng.spawn(2)
        run = run_policy(Environment.sampled(g, cfg.T, env_rng), make_policy(g, cfg, pol_rng), cfg.T, cfg.k)
        Path(args.trace).write_text(run.to_jsonl(g.labels))
    _emit(rows_to_csv(rows) if args.out == "csv" else rows_to_json(rows), args.output)
    return EXIT_OK


def cmd_bench(args) -> int:
    preset = PRESETS[args.preset]
    if (args.T is None) != (args.k is None):
        raise UsageError("-T and -k must be given together")
    g = load_edge_list(args.graph, args.scheme) if args.graph else preset.build_graph(args.seed)
    overrides = {name: getattr(args, attr) for name, attr in
                 (("trials", "trials"), ("adaptive_trials", "adaptive_trials"), ("eps", "eps"),
                  ("ell", "ell"), ("r", "r")) if getattr(args, attr) is not None}
    if args.graph:
        overrides["graph_source"] = str(args.graph)
    wanted = None
    if args.algo:
        wanted = [a.strip() for a in args.algo.split(",") if a.strip()]
        unknown = [a for a in wanted if a not in ALGORITHMS]
        if unknown:
            raise UsageError(f"unknown algorithm(s): {', '.join(unknown)}")
    configs = preset.configs(args.seed, args.jobs, **overrides)
    if args.T is not None:
        seen = dict.fromkeys(c.algorithm for c in configs)
        configs = [ExperimentConfig(a, args.T, args.k, seed=args.seed, jobs=args.jobs,
                                    **{**dict(trials=preset.trials, adaptive_trials=preset.adaptive_trials,
                                              r=preset.r), **overrides}) for a in seen]
    rows = []
    timing = args.timing == "wall"
    for cfg in configs:
        if wanted and cfg.algorithm not in wanted:
            continue
        rows.extend(run_experiment(g, cfg, timing=timing).rows)
    meta = {"preset": args.preset, "seed": args.seed, "n": g.n, "m": g.m}
    _emit(rows_to_csv(rows) if args.out == "csv" else rows_to_json(rows, meta), args.output)
    return EXIT_OK


def _brute_force_opt(g: Graph, T: int, k: int, max_coins):
    k = min(k, g.n)
    best, best_val = None, -1.0
    per_round = list(itertools.combinations(range(g.n), k))
    for combo in itertools.product(per_round, repeat=T):
        sched = SeedSchedule(tuple(combo))
        val = spread_exact(g, sched, max_coins=max_coins)
        if val > best_val + 1e-12:
            best, best_val = sched, val
    return best, best_val


def cmd_oracle(args) -> int:
    g = _load_graph(args)
    cap = None if args.max_coins < 0 else args.max_coins
    if not args.schedule and not args.opt:
        raise UsageError("oracle needs --schedule and/or --opt")
    out = {}
    if args.schedule:
        sched = parse_schedule(args.schedule, g, args.T)
        out["spread"] = spread_exact(g, sched, max_coins=cap)
    if args.opt:
        sched, val = _brute_force_opt(g, args.T, args.k, cap)
        out["opt"] = {"value": val, "schedule": sched.to_json(g.labels)}
    sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


COMMANDS = {"gen-graph": cmd_gen_graph, "spread": cmd_spread, "select": cmd_select,
            "adaptive": cmd_adaptive, "bench": cmd_bench, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mrim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceLimitError, InstanceTooLarge, MemoryError) as exc:
        print(f"mrim: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except EdgeListError as exc:
        print(f"mrim: bad edge list: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"mrim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
