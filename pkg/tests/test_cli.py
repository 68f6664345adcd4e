from __future__ import annotations

import json

import pytest

from treelab.cli import FORMULAS, main
from treelab.tree import parse_trees


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_to_stdout_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "sample", "--n", "6", "--count", "3", "--seed", "2")
    assert code == 0
    ts = parse_trees(out)
    assert len(ts) == 3 and all(T.n == 6 for T in ts)
    f = tmp_path / "t.txt"
    assert run(capsys, "sample", "--n", "6", "--count", "3", "--seed", "2", "--method", "prufer", "--out", str(f))[0] == 0
    assert len(parse_trees(f.read_text())) == 3


def test_stats_from_input(capsys, tmp_path):
    f = tmp_path / "t.txt"
    f.write_text("4\n1 2\n1 3\n1 4\n\n4\n1 2\n2 3\n3 4\n")
    code, out, _ = run(capsys, "stats", "--parameter", "leaves", "--input", str(f))
    assert code == 0
    d = json.loads(out)
    assert d["M"] == 2 and d["mean"] == 2.5


def test_stats_sampled_with_pattern(capsys, tmp_path):
    pf = tmp_path / "p.json"
    pf.write_text(json.dumps({"l": 3, "edges": [[1, 2], [2, 3]], "theta": [1, 0, 1]}))
    out_csv = tmp_path / "o.csv"
    code, out, _ = run(capsys, "stats", "--parameter", "pattern", "--pattern-file", str(pf),
                       "--n", "12", "--count", "50", "--out", str(out_csv))
    assert code == 0
    assert out_csv.read_text().count("\n") == 51
    assert (tmp_path / "o.csv.summary.json").exists()


def test_stats_aut_flags(capsys):
    code, out, _ = run(capsys, "stats", "--parameter", "log-aut-small", "--threshold", "2",
                       "--n", "40", "--count", "100", "--format", "json")
    assert code == 0 and json.loads(out)["M"] == 100


def test_moments_reports(capsys):
    code, out, _ = run(capsys, "moments", "--formula", "branch-moment", "--params", '{"n": 4, "shape": "singleton", "k": 1}')
    assert code == 0
    d = json.loads(out)
    assert d["exact"] == "3/8" and d["value"] == 0.375
    code, out, _ = run(capsys, "moments", "--formula", "path-variance", "--params", '{"n": 2000, "l": 3}')
    assert json.loads(out)["value"] == 1000


@pytest.mark.parametrize(
    "formula,params",
    [
        ("pattern-expectation", {"n": 4, "pattern": {"l": 2, "edges": [[1, 2]], "theta": [1, 0]}}),
        ("pattern-limit", {"n": 100, "pattern": {"l": 2, "edges": [[1, 2]], "theta": [1, 0]}}),
        ("path-variance-identity", {"l": 7}),
        ("multinomial", {"n": 4, "a": [1, 0, 0, 0], "b": [1, 0, 0, 0]}),
        ("conditional", {"x": [0, 1, 1, 0], "H": {"l": 3, "edges": [[1, 2], [2, 3]]}}),
        ("forest-extensions", {"n": 4, "components": [[[1, 2], [[1, 2]], [1, 2]], [[3], [], [3]], [[4], [], [4]]]}),
        ("poisson-log", {"lam": 0.3}),
        ("lambda-series", {"s_max": 6}),
    ],
)
def test_every_formula_runs(capsys, formula, params):
    assert formula in FORMULAS
    code, out, _ = run(capsys, "moments", "--formula", formula, "--params", json.dumps(params))
    assert code == 0
    assert json.loads(out)["formula"]


def test_forest_formula_value(capsys):
    params = {"n": 4, "components": [[[1, 2], [[1, 2]], [1, 2]], [[3], [], [3]], [[4], [], [4]]]}
    _, out, _ = run(capsys, "moments", "--formula", "forest-extensions", "--params", json.dumps(params))
    assert json.loads(out)["value"] == 8


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "oracle", "--n", "4")
    assert code == 0
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_experiment_and_tails(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 100, "M": 200, "parameter": "branch-edge", "seed": 4}))
    code, out, _ = run(capsys, "experiment", "--config", str(cfg))
    assert code == 0 and json.loads(out)["parameter"] == "branch-edge"
    code, out, _ = run(capsys, "experiment", "--tails", "--n", "300", "--count", "50")
    assert code == 0 and "ln n" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--n", "5"],
        ["stats", "--n", "5", "--count", "3"],
        ["stats", "--parameter", "pattern", "--n", "5", "--count", "3"],
        ["stats", "--parameter", "leaves", "--n", "1", "--count", "3"],
        ["moments", "--formula", "nope"],
        ["moments", "--formula", "path-variance", "--params", "{bad"],
        ["moments", "--formula", "path-variance", "--params", "{}"],
        ["moments", "--formula", "path-variance", "--params", '{"n": 10, "l": 2}'],
        ["verify", "--suite", "other"],
        ["verify", "--n", "12"],
        ["experiment", "--config", "/nonexistent.json"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert main(argv) == 2


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0


def test_verify_failure_exits_1(capsys, monkeypatch):
    import treelab.verify

    monkeypatch.setattr(treelab.verify, "oracle_suite", lambda n: [("x", True, ""), ("y", False, "broken")])
    code, out, _ = run(capsys, "verify", "--n", "4")
    assert code == 1 and "FAIL" in out
