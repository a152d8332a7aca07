import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from fitpa.cli import main, replay_log_prob
from fitpa.config import load_config
from fitpa.measures import log_likelihood
from fitpa.tree import loads_tree, read_tree

TWO_COLOUR = """
[model]
alphabet = ["x", "y"]
mu = [0.3, 0.7]
gamma = [[1.5, 0.5], [1.0, 0.25]]
beta = [[0.5, 1.5], [1.0, 1.75]]

[run]
n = 200
seed = 11
"""


def sections(text):
    """Split report text into ``{title: rows}`` with each table parsed as CSV."""
    out = {}
    for block in text.strip().split("# ")[1:]:
        title, _, body = block.partition("\n")
        out[title.strip()] = list(csv.DictReader(io.StringIO(body.strip())))
    return out


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "model.toml"
    path.write_text(TWO_COLOUR)
    return path


def test_generate_analyze_round_trip(tmp_path, capsys, config):
    tree_path = tmp_path / "tree.txt"
    code, out, _ = run(capsys, "generate", "--config", str(config), "--out", str(tree_path))
    assert code == 0
    generated = sections(out)["generated"][0]
    code, out, _ = run(capsys, "analyze", "--config", str(config), "--in", str(tree_path))
    assert code == 0
    report = sections(out)
    assert sum(float(r["mass[probability]"]) for r in report["degree_pair_measure"]) == pytest.approx(1.0, abs=1e-12)
    for t in {r["t"] for r in report["path_measure"]}:
        rows = [r for r in report["path_measure"] if r["t"] == t]
        assert sum(float(r["mass[probability]"]) for r in rows) == pytest.approx(1.0, abs=1e-12)
    offline = float(report["log_likelihood"][0]["log_prob[nats]"])
    assert float(generated["log_prob[nats]"]) == pytest.approx(offline, abs=1e-9)


def test_reruns_are_byte_identical(tmp_path, capsys, config):
    outputs = []
    for i in range(2):
        path = tmp_path / f"t{i}.txt"
        run(capsys, "generate", "--config", str(config), "--seed", "4", "--out", str(path))
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    code, out, _ = run(capsys, "generate", "--config", str(config), "--seed", "5")
    assert out.encode() != outputs[0]


@pytest.mark.parametrize("sampler", ["naive", "linear", "fenwick"])
def test_samplers_agree_through_the_cli(tmp_path, capsys, config, sampler):
    code, out, _ = run(capsys, "generate", "--config", str(config), "--sampler", sampler, "--n", "60")
    assert code == 0
    assert loads_tree(out).n == 60


def test_three_vertex_example(tmp_path, capsys):
    path = tmp_path / "tree.txt"
    path.write_text("n=3 alphabet=x\n1 x 0 0\n2 x 1 0\n3 x 1 1\n")
    code, out, _ = run(capsys, "analyze", "--in", str(path))
    assert code == 0
    ll = sections(out)["log_likelihood"][0]
    assert float(ll["log_prob[nats]"]) == pytest.approx(math.log(2 / 3), abs=1e-15)


def test_replay_matches_likelihood(config):
    cfg = load_config(config)
    from fitpa.growth import generate

    for seed in range(5):
        tree = generate(cfg.spec, cfg.mu, 500, seed)
        assert replay_log_prob(tree, cfg.spec, cfg.mu) == pytest.approx(
            log_likelihood(tree, cfg.spec, cfg.mu).log_prob, abs=1e-9
        )


def test_oracle_dump(capsys, tmp_path):
    out_path = tmp_path / "dump.csv"
    code, _, _ = run(capsys, "oracle-dump", "--n", "4", "--out", str(out_path))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out_path.read_text())))
    assert len(rows) == 6
    assert math.fsum(float(r["prob[probability]"]) for r in rows) == pytest.approx(1.0, abs=1e-12)


def test_errors_exit_with_code_two(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--in", str(tmp_path / "missing.txt"))
    assert code == 2 and "error" in err
    bad = tmp_path / "bad.toml"
    bad.write_text('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\nfoo = 1\n')
    code, _, err = run(capsys, "generate", "--config", str(bad))
    assert code == 2 and "line 5" in err
    code, _, err = run(capsys, "oracle-dump", "--n", "40")
    assert code == 2


def test_analyze_rejects_mismatched_alphabet(capsys, tmp_path, config):
    path = tmp_path / "tree.txt"
    path.write_text("n=2 alphabet=q\n1 q 0 0\n2 q 1 0\n")
    code, _, err = run(capsys, "analyze", "--config", str(config), "--in", str(path))
    assert code == 2


EXPERIMENT = """
[model]
alphabet = ["x", "y"]
gamma = 1.0
beta = 1.0

[run]
n_grid = [30, 60]
replicas = 4
seed = 2

[experiment]
k_max = 3
K = 5

[[experiment.event]]
cells = [[0, "x", "x", 1.0], [0, "x", "y", 1.0], [0, "y", "x", 1.0], [0, "y", "y", 1.0]]
sense = ">="
rhs = 0.0
"""


@pytest.mark.parametrize("command", ["lln", "aep", "ldp"])
def test_experiments_run_and_ignore_jobs(capsys, tmp_path, command):
    path = tmp_path / "exp.toml"
    path.write_text(EXPERIMENT)
    _, one, _ = run(capsys, command, "--config", str(path))
    code, many, _ = run(capsys, command, "--config", str(path), "--jobs", "3")
    assert code == 0
    assert one == many
    summary = sections(one)["estimates" if command == "ldp" else "summary"]
    assert [int(r["n"]) for r in summary] == [30, 60]


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "fitpa.cli", "generate", "--n", "4", "--seed", "1"],
        capture_output=True, text=True, check=True,
    )
    assert loads_tree(proc.stdout).n == 4
