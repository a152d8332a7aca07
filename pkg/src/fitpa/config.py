"""Experiment configuration: one TOML document with [model], [run] and [experiment].

Example::

    [model]
    alphabet = ["x", "y"]
    mu = [0.3, 0.7]
    gamma = [[1.0, 0.5], [0.5, 1.0]]   # rows: target colour, columns: newcomer
    beta = [[1.0, 1.5], [1.5, 1.0]]

    [run]
    n = 100000
    replicas = 20
    seed = 1
    sampler = "linear"

    [experiment]
    kind = "lln"
    k_max = 10

Scalars are accepted for ``gamma``/``beta`` (same value for every pair) and
``mu`` may be omitted (uniform).  Unknown keys are rejected.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FitPAError
from .growth import SAMPLERS
from .model import ColorAlphabet, ColorLaw, FitnessSpec, build_fitness_spec
from .optimize import CellConstraint
from .tilt import TiltSpec

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

KINDS = ("lln", "aep", "ldp", "generate", "analyze")
_SECTIONS = {"model", "run", "experiment"}
_MODEL_KEYS = {"alphabet", "mu", "gamma", "beta"}
_RUN_KEYS = {"n", "n_grid", "replicas", "seed", "sampler"}
_EXPERIMENT_KEYS = {"kind", "k_max", "checkpoints", "tolerance", "marginal_mode", "K", "tilt", "event"}
_TILT_KEYS = {"h", "g", "identity"}
_EVENT_KEYS = {"cells", "sense", "rhs"}


@dataclass(frozen=True)
class ExperimentConfig:
    spec: FitnessSpec
    mu: ColorLaw
    n_grid: tuple[int, ...] = (1000,)
    replicas: int = 1
    seed: int = 0
    sampler: str = "linear"
    kind: str = "generate"
    k_max: int = 10
    checkpoints: tuple[float, ...] = ()
    tolerance: float = 1e-12
    marginal_mode: str = "paper"
    K: int = 30
    tilt: TiltSpec | None = None
    constraints: tuple[CellConstraint, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.n_grid[-1]


class _Source:
    """Finds the line of a key so that errors can point at it."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, section: str | None, key: str) -> int | None:
        current = None
        header = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.\-]+)\s*\]\]?")
        keyline = re.compile(rf"^\s*{re.escape(key)}\s*=")
        for i, line in enumerate(self.lines, start=1):
            m = header.match(line)
            if m:
                current = m.group(1)
                if section is None and current == key:
                    return i
                continue
            if keyline.match(line) and (section is None or current == section):
                return i
        return None


def _reject_unknown(table: dict, allowed: set, section: str, src: _Source) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}]", src.line_of(section, key))


def _fail(message: str, src: _Source, section: str, key: str):
    raise ConfigError(message, src.line_of(section, key))


def _model(block: dict, src: _Source) -> tuple[FitnessSpec, ColorLaw]:
    _reject_unknown(block, _MODEL_KEYS, "model", src)
    for key in ("alphabet", "gamma", "beta"):
        if key not in block:
            raise ConfigError(f"[model] needs {key!r}", src.line_of(None, "model"))
    try:
        alphabet = ColorAlphabet(tuple(block["alphabet"]))
    except (FitPAError, TypeError) as exc:
        _fail(str(exc), src, "model", "alphabet")
    try:
        spec = build_fitness_spec(block["gamma"], block["beta"], alphabet)
    except (FitPAError, ValueError, TypeError) as exc:
        _fail(str(exc), src, "model", "gamma")
    try:
        mu = ColorLaw(alphabet, np.asarray(block["mu"], dtype=float)) if "mu" in block else ColorLaw.uniform(alphabet)
    except (FitPAError, ValueError, TypeError) as exc:
        _fail(str(exc), src, "model", "mu")
    return spec, mu


def _positive_int(value, src, section, key, minimum=1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(f"{key} must be an integer >= {minimum}", src, section, key)
    return value


def _tilt(block: dict, size: int, src: _Source) -> TiltSpec:
    _reject_unknown(block, _TILT_KEYS, "experiment.tilt", src)
    if block.get("identity", False):
        return TiltSpec.identity_for(size)
    try:
        h = np.asarray(block.get("h", [0.0] * size), dtype=float)
        g = np.asarray(block.get("g", 0.0), dtype=float)
        if g.ndim == 0:
            g = np.full((1, size, size), float(g))
        elif g.ndim == 1:
            g = np.repeat(g[:, None, None], size, axis=1).repeat(size, axis=2)
        return TiltSpec(h, g)
    except (ValueError, TypeError) as exc:
        _fail(f"bad tilt table: {exc}", src, "experiment.tilt", "g")


def _events(items, alphabet: ColorAlphabet, src: _Source) -> tuple[CellConstraint, ...]:
    out = []
    for item in items:
        _reject_unknown(item, _EVENT_KEYS, "experiment.event", src)
        try:
            coeffs = {}
            for k, a1, a2, coef in item["cells"]:
                alphabet.pair_index((a1, a2))
                coeffs[(int(k), (a1, a2))] = float(coef)
            out.append(CellConstraint(coeffs, item.get("sense", ">="), float(item["rhs"])))
        except (KeyError, ValueError, TypeError, FitPAError) as exc:
            raise ConfigError(f"bad event constraint: {exc}", src.line_of(None, "experiment.event")) from None
    return tuple(out)


def loads_config(text: str) -> ExperimentConfig:
    """Parse a TOML configuration string."""
    src = _Source(text)
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(str(exc), int(m.group(1)) if m else None) from None
    _reject_unknown(doc, _SECTIONS, "top level", src)
    if "model" not in doc:
        raise ConfigError("missing [model] section")
    spec, mu = _model(doc["model"], src)
    run = doc.get("run", {})
    _reject_unknown(run, _RUN_KEYS, "run", src)
    exp = doc.get("experiment", {})
    _reject_unknown(exp, _EXPERIMENT_KEYS, "experiment", src)

    kwargs: dict = {}
    if "n_grid" in run:
        grid = run["n_grid"]
        if not isinstance(grid, list) or not grid:
            _fail("n_grid must be a non-empty list", src, "run", "n_grid")
        kwargs["n_grid"] = tuple(_positive_int(v, src, "run", "n_grid") for v in grid)
    elif "n" in run:
        kwargs["n_grid"] = (_positive_int(run["n"], src, "run", "n"),)
    if "replicas" in run:
        kwargs["replicas"] = _positive_int(run["replicas"], src, "run", "replicas")
    if "seed" in run:
        kwargs["seed"] = _positive_int(run["seed"], src, "run", "seed", minimum=0)
    if "sampler" in run:
        if run["sampler"] not in SAMPLERS:
            _fail(f"sampler must be one of {SAMPLERS}", src, "run", "sampler")
        kwargs["sampler"] = run["sampler"]

    if "kind" in exp:
        if exp["kind"] not in KINDS:
            _fail(f"kind must be one of {KINDS}", src, "experiment", "kind")
        kwargs["kind"] = exp["kind"]
    if "k_max" in exp:
        kwargs["k_max"] = _positive_int(exp["k_max"], src, "experiment", "k_max", minimum=0)
    if "K" in exp:
        kwargs["K"] = _positive_int(exp["K"], src, "experiment", "K", minimum=0)
    if "checkpoints" in exp:
        try:
            kwargs["checkpoints"] = tuple(float(t) for t in exp["checkpoints"])
        except (TypeError, ValueError):
            _fail("checkpoints must be a list of numbers", src, "experiment", "checkpoints")
    if "tolerance" in exp:
        tol = exp["tolerance"]
        if not isinstance(tol, (int, float)) or not 0 < tol < 1:
            _fail("tolerance must lie in (0, 1)", src, "experiment", "tolerance")
        kwargs["tolerance"] = float(tol)
    if "marginal_mode" in exp:
        if exp["marginal_mode"] not in ("paper", "pair"):
            _fail("marginal_mode must be 'paper' or 'pair'", src, "experiment", "marginal_mode")
        kwargs["marginal_mode"] = exp["marginal_mode"]
    if "tilt" in exp:
        kwargs["tilt"] = _tilt(exp["tilt"], len(spec.alphabet), src)
    if "event" in exp:
        kwargs["constraints"] = _events(exp["event"], spec.alphabet, src)
    return ExperimentConfig(spec, mu, **kwargs)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return loads_config(fh.read())
