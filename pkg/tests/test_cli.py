"""End-to-end command-line checks with desk-tiny settings."""

import json
import os

import pytest

from hframe.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cwd = os.getcwd()
    os.chdir(root)
    yield str(root)
    os.chdir(cwd)


def run(*argv):
    return main(list(argv))


def test_full_workflow(workdir, capsys):
    assert run(
        "gen-graph", "--vertices", "800", "--edges", "2400", "--labels", "3",
        "--seed", "1", "--out", "g.graph",
    ) == 0
    assert run(
        "gen-data", "--graph", "g.graph", "--examples", "24", "--seed", "2",
        "--out", "data", "--min-depth", "2", "--max-depth", "4", "--level-cap", "25",
    ) == 0
    assert run(
        "train", "--data", "data", "--out", "model.json", "--epochs", "2",
        "--layers", "2", "--dim", "8", "--seed", "3", "--history-out", "hist.json",
    ) == 0
    hist = json.load(open("hist.json", encoding="utf-8"))
    assert len(hist) == 2
    capsys.readouterr()

    assert run("eval", "--data", "data", "--model", "model.json") == 0
    out = capsys.readouterr().out
    assert out.startswith("method\taccuracy")
    assert "hframe" in out

    # single pattern/graph decisions against the trained model; pick a
    # positive example so the pattern provably embeds into its region
    rows = [ln.split("\t") for ln in open("data/index.tsv", encoding="utf-8").readlines()[1:]]
    idx = next(r for r in rows if r[5] == "positive")
    pattern_file, graph_file = f"data/{idx[1]}", f"data/{idx[2]}"
    assert run(
        "decide", "--pattern", pattern_file, "--graph", graph_file,
        "--model", "model.json", "--verbose",
    ) == 0
    assert capsys.readouterr().out.strip() in ("true", "false")

    assert run("enumerate", "--pattern", pattern_file, "--graph", graph_file, "--limit", "3") == 0
    out = capsys.readouterr().out.splitlines()
    assert int(out[0]) >= 1  # the pattern came from this graph
    assert "->" in out[1]

    assert run("dualsim", "--pattern", pattern_file, "--graph", graph_file, "--show-sets") == 0
    out = capsys.readouterr().out
    assert out.startswith("sweeps 2")
    assert "C(0) size" in out

    assert run(
        "bench", "--data", "data", "--model", "model.json",
        "--methods", "exact,dualsim-only,hframe", "--reps", "1",
        "--out-prefix", "report",
    ) == 0
    capsys.readouterr()
    rep = json.load(open("report.json", encoding="utf-8"))
    assert [r["method"] for r in rep["rows"]] == ["exact", "dualsim-only", "hframe"]
    assert os.path.exists("report.tsv")


def test_fixtures_command(capsys):
    assert run("fixtures") == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5 and "FAIL" not in out


def test_bench_cores_command(capsys):
    assert run(
        "bench-cores", "--vertices", "400", "--edges", "1200", "--labels", "3",
        "--queries", "2", "--seed", "4",
    ) == 0
    out = capsys.readouterr().out
    assert "backend" in out
    assert "pure-python" in out


def test_operational_error_exit_code(capsys):
    assert run("decide", "--pattern", "missing.graph", "--graph", "missing.graph",
               "--model", "missing.json") == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        run("decide")  # missing required arguments
    assert exc.value.code == 2
