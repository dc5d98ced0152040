import csv
import io
import json

import pytest

from mrim import cli
from mrim.bench import (CSV_COLUMNS, PRESETS, ExperimentConfig, baseline_sg, baseline_sg_r, rows_to_csv,
                        rows_to_json, run_experiment, run_preset)
from mrim.graph import Graph, generate_synthetic, save_edge_list
from mrim.greedy import ExactGain, GreedyConfig, wr_greedy
from mrim.spread import SeedSchedule, spread_exact


# ---------------------------------------------------------------------------
# baselines

def test_sg_on_hub(hub_graph):
    sched = baseline_sg(hub_graph, 2, 1, 200, 0)
    assert sched.rounds == ((0,), (4,))
    assert spread_exact(hub_graph, sched) == 5.0


def test_sg_r_on_hub(hub_graph):
    sched = baseline_sg_r(hub_graph, 2, 1, 200, 0)
    assert sched.rounds == ((0,), (0,))
    assert spread_exact(hub_graph, sched) == 4.0


def test_sg_single_round_equals_wr_greedy():
    g = generate_synthetic("power_law", 100, scheme="wc", seed=3)
    assert baseline_sg(g, 1, 3, 100, 5) == wr_greedy(g, GreedyConfig(3, 1, 100), rng=5)


def test_sg_needs_enough_nodes(hub_graph):
    with pytest.raises(ValueError):
        baseline_sg(hub_graph, 3, 2, 10, 0)


def test_sg_r_without_propagation():
    g = generate_synthetic("erdos_renyi", 10, avg_deg=2, scheme="constant:0", seed=0)
    sched = baseline_sg_r(g, 4, 2, 10, 0)
    assert spread_exact(g, sched, max_coins=None) == 2.0


# ---------------------------------------------------------------------------
# experiments

def test_config_defaults_and_validation():
    cfg = ExperimentConfig("SG")
    assert (cfg.T, cfg.k, cfg.adaptive_trials, cfg.trials) == (5, 10, 100, 10000)
    with pytest.raises(ValueError):
        ExperimentConfig("Magic")
    with pytest.raises(ValueError):
        ExperimentConfig("SG", T=0)


def test_streams_depend_only_on_algorithm_and_seed():
    a1, _ = ExperimentConfig("CR-IMM", seed=3).streams()
    a2, _ = ExperimentConfig("CR-IMM", seed=3, trials=5).streams()
    b, _ = ExperimentConfig("WR-IMM", seed=3).streams()
    assert a1.random() == a2.random() != b.random()


def test_rows_monotone_and_reproducible():
    g = generate_synthetic("power_law", 200, scheme="wc", seed=1)
    for algo in ("CR-IMM", "AdaIMM", "SG-R"):
        cfg = ExperimentConfig(algo, T=3, k=2, trials=2000, adaptive_trials=10, r=50, seed=4)
        res = run_experiment(g, cfg, timing=False)
        means = [r.mean for r in res.rows]
        assert means == sorted(means)
        assert [r.round for r in res.rows] == [1, 2, 3]
        assert rows_to_csv(res.rows) == rows_to_csv(run_experiment(g, cfg, timing=False).rows)


def test_csv_and_json_layout():
    g = generate_synthetic("power_law", 120, scheme="wc", seed=1)
    res = run_experiment(g, ExperimentConfig("WR-IMM", T=2, k=2, trials=500, seed=1))
    rows = list(csv.reader(io.StringIO(rows_to_csv(res.rows))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3 and float(rows[1][7]) >= 0
    payload = json.loads(rows_to_json(res.rows, {"n": g.n}))
    assert payload["columns"] == list(CSV_COLUMNS)
    assert payload["rows"][1]["round"] == 2 and payload["meta"]["n"] == 120


def test_smoke_preset_runs_every_algorithm():
    results = run_preset("smoke", seed=2, timing=False)
    assert {r.config.algorithm for r in results} == set(PRESETS["smoke"].algorithms)
    for r in results:
        assert len(r.rows) == 2


def test_adaptiveness_preset_shapes():
    shapes = [(c.T, c.k) for c in PRESETS["adaptiveness"].configs()]
    assert shapes == [(1, 8), (2, 4), (4, 2), (8, 1)]


# ---------------------------------------------------------------------------
# command line

@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.txt"
    save_edge_list(generate_synthetic("power_law", 150, scheme="wc", seed=2), path)
    return path


@pytest.fixture
def tiny_file(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text("0 1 1\n0 2 1\n0 3 1\n# isolated node 4 via a zero-probability edge\n4 0 0\n")
    return path


def _run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_graph_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert _run(["gen-graph", "-n", 100, "--seed", 4, "-o", a], capsys)[0] == 0
    assert _run(["gen-graph", "-n", 100, "--seed", 4, "-o", b], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("algo", ["CR-IMM", "WR-IMM", "SG", "AdaIMM"])
def test_select_byte_identical(graph_file, tmp_path, capsys, algo):
    outs = []
    for i in range(2):
        path = tmp_path / f"s{i}.json"
        code, _, _ = _run(["select", "--graph", graph_file, "--algo", algo, "-T", 2, "-k", 2, "-r", 50,
                           "--seed", 9, "--out", "json", "-o", path], capsys)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    payload = json.loads(outs[0])
    assert payload["algorithm"] == algo and payload["schedule"]["T"] == 2


def test_select_then_spread(graph_file, tmp_path, capsys):
    sched = tmp_path / "s.json"
    _run(["select", "--graph", graph_file, "--algo", "CR-IMM", "-T", 2, "-k", 2, "--out", "json", "-o", sched], capsys)
    code, out, _ = _run(["spread", "--graph", graph_file, "--schedule", sched, "--trials", 2000], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["round"] for r in rows] == ["1", "2"]
    code, out, _ = _run(["spread", "--graph", graph_file, "--schedule", sched, "--method", "rr", "--trials", 5000],
                        capsys)
    assert code == 0 and "rr,2" in out


def test_spread_inline_schedule_exact(tiny_file, capsys):
    code, out, _ = _run(["spread", "--graph", tiny_file, "--schedule", "0@1,4@2", "--method", "exact"], capsys)
    assert code == 0
    assert list(csv.DictReader(io.StringIO(out)))[0]["mean"] == "5.0000"


def test_oracle_opt(tiny_file, capsys):
    code, out, _ = _run(["oracle", "--graph", tiny_file, "-T", 2, "-k", 1, "--opt", "--schedule", "0@1,0@2"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["spread"] == 4.0 and data["opt"]["value"] == 5.0


def test_bench_timing_none_is_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"b{i}.csv"
        code, _, _ = _run(["bench", "--preset", "smoke", "--algo", "SG-R,CR-IMM,AdaIMM", "--timing", "none",
                           "--seed", 3, "-o", path], capsys)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(io.StringIO(outs[0].decode())))
    assert {r["algorithm"] for r in rows} == {"SG-R", "CR-IMM", "AdaIMM"}
    assert all(r["seconds"] == "" for r in rows)


def test_bench_shape_override(graph_file, capsys):
    code, out, _ = _run(["bench", "--preset", "smoke", "--graph", graph_file, "--algo", "WR-IMM", "-T", 3, "-k", 1,
                         "--trials", 300], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["round"] for r in rows] == ["1", "2", "3"]


def test_adaptive_command_with_trace(graph_file, tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    code, out, _ = _run(["adaptive", "--graph", graph_file, "-T", 2, "-k", 2, "--trials", 5, "--trace", trace,
                         "--out", "json"], capsys)
    assert code == 0
    assert len(json.loads(out)["rows"]) == 2
    assert [json.loads(x)["round"] for x in trace.read_text().splitlines()] == [1, 2]


@pytest.mark.parametrize("argv", [
    ["select", "--algo", "SG"],
    ["select", "--graph", "x", "--algo", "Nope"],
    ["frobnicate"],
    ["select", "--graph", "x", "--algo", "SG", "-k", "0"],
])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 1


def test_bench_half_shape_is_usage_error(capsys):
    assert _run(["bench", "--preset", "smoke", "-T", 2], capsys)[0] == 1


def test_input_errors_exit_2(tmp_path, capsys):
    assert _run(["select", "--graph", tmp_path / "missing.txt", "--algo", "SG"], capsys)[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 0.5\n0 1 7\n")
    code, _, err = _run(["select", "--graph", bad, "--algo", "SG"], capsys)
    assert code == 2 and "line 2" in err
    code, _, _ = _run(["select", "--graph", bad, "--scheme", "wc", "--algo", "CR-IMM", "-T", 1, "-k", 5], capsys)
    assert code == 2  # k larger than n


def test_resource_cap_exit_3(graph_file, capsys):
    code, _, err = _run(["oracle", "--graph", graph_file, "-T", 1, "-k", 1, "--schedule", "0@1"], capsys)
    assert code == 3 and "resource" in err
