import math

import numpy as np
import pytest

from fitpa.config import load_config, loads_config
from fitpa.errors import ConfigError

FULL = """
[model]
alphabet = ["x", "y"]
mu = [0.3, 0.7]
gamma = [[1.0, 0.5], [0.5, 1.0]]
beta = [[1.0, 1.5], [1.5, 1.0]]

[run]
n_grid = [50, 100]
replicas = 7
seed = 3
sampler = "fenwick"

[experiment]
kind = "ldp"
k_max = 4
checkpoints = [0.5, 1.0]
tolerance = 1e-10
marginal_mode = "pair"
K = 12

[experiment.tilt]
h = [0.1, -0.1]
g = [1.5, 0.0]

[[experiment.event]]
cells = [[0, "x", "x", 1.0], [0, "y", "x", 1.0]]
sense = ">="
rhs = 0.2
"""


def test_full_document():
    cfg = loads_config(FULL)
    assert cfg.spec.alphabet.symbols == ("x", "y")
    assert cfg.mu.probabilities.tolist() == [0.3, 0.7]
    assert cfg.n_grid == (50, 100) and cfg.n == 100
    assert (cfg.replicas, cfg.seed, cfg.sampler, cfg.kind) == (7, 3, "fenwick", "ldp")
    assert (cfg.k_max, cfg.K, cfg.marginal_mode, cfg.tolerance) == (4, 12, "pair", 1e-10)
    assert cfg.checkpoints == (0.5, 1.0)
    assert cfg.tilt.g.shape == (2, 2, 2) and cfg.tilt.g[0, 1, 0] == 1.5 and cfg.tilt.g[1].max() == 0.0
    (c,) = cfg.constraints
    assert c.sense == ">=" and c.rhs == 0.2
    assert c.coeffs == {(0, ("x", "x")): 1.0, (0, ("y", "x")): 1.0}


def test_minimal_document_defaults(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('[model]\nalphabet = ["x"]\ngamma = 1.0\nbeta = 1.0\n')
    cfg = load_config(path)
    assert cfg.mu.probabilities.tolist() == [1.0]
    assert cfg.spec.f(3, 0, 0) == 4.0
    assert cfg.tilt is None and cfg.constraints == ()


def test_identity_tilt_flag():
    cfg = loads_config('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\n[experiment.tilt]\nidentity = true\n')
    assert cfg.tilt.identity


@pytest.mark.parametrize(
    "text, line",
    [
        ('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\nbogus = 2\n', 5),
        ('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\n[run]\n\nseeds = 2\n', 7),
        ('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\n[run]\nsampler = "slow"\n', 6),
        ('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\n[run]\nn = 0\n', 6),
        ('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\n[experiment]\nkind = "other"\n', 6),
        ('[model]\nalphabet = ["x"]\ngamma = 1\n\nbeta = = 1\n', 5),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as err:
        loads_config(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_model_errors():
    with pytest.raises(ConfigError):
        loads_config("[run]\nn = 5\n")
    with pytest.raises(ConfigError):
        loads_config('[model]\nalphabet = ["x", "y"]\ngamma = [[1, 1], [1, 1]]\nbeta = [[1, 2], [1, 1]]\n')
    with pytest.raises(ConfigError):
        loads_config('[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\nmu = [0.5]\n')
    with pytest.raises(ConfigError):
        loads_config(
            '[model]\nalphabet = ["x"]\ngamma = 1\nbeta = 1\n[[experiment.event]]\ncells = [[0, "x", "z", 1]]\nrhs = 0\n'
        )
