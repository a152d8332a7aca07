"""Command-line entry point ``fitpa``.

Subcommands::

    generate     grow one tree and write it in the text tree format
    analyze      degree-and-pair measure, path snapshots and log-likelihood of a tree file
    oracle-dump  exact enumeration of all trees of a small size
    lln | aep | ldp   run an experiment described by a config file

Without ``--config`` the model is a single colour ``x`` with ``f(k) = k + 1``
(``analyze`` uses the tree file's alphabet with ``gamma = beta = 1`` instead).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import _kernels
from .config import ExperimentConfig, load_config
from .errors import FitPAError
from .experiments import Report, run_aep, run_ldp, run_lln
from .growth import SAMPLERS, DegreeWeight, generate
from .measures import checkpoint_index, degree_pair_measure, degree_snapshot, log_likelihood, path_measure
from .model import ColorLaw, build_fitness_spec
from .oracle import dumps_enumeration, enumerate_trees
from .tree import dumps_tree, read_tree


def _default_config(alphabet=("x",)) -> ExperimentConfig:
    spec = build_fitness_spec(1.0, 1.0, list(alphabet))
    return ExperimentConfig(spec, ColorLaw.uniform(spec.alphabet))


def _config(args, alphabet=("x",)) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else _default_config(alphabet)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "n", None) is not None:
        changes["n_grid"] = (args.n,)
    if getattr(args, "sampler", None) is not None:
        changes["sampler"] = args.sampler
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def replay_log_prob(tree, spec, mu) -> float:
    """``log P(tree)`` from the compiled replay used alongside generation."""
    num, den, status = _kernels.replay_log_attach(
        np.ascontiguousarray(tree.colors), np.ascontiguousarray(tree.parents), *DegreeWeight.affine(spec).kernel_args()
    )
    if status:
        return float("-inf")
    return float(np.log(mu.probabilities)[tree.colors].sum()) + num - den


def cmd_generate(args) -> None:
    cfg = _config(args)
    tree = generate(cfg.spec, cfg.mu, cfg.n, cfg.seed, cfg.sampler)
    if args.out:
        _emit(dumps_tree(tree), args.out)
        report = Report()
        report.add("generated", ("n", "seed", "sampler", "log_prob[nats]")).rows.append(
            (tree.n, cfg.seed, cfg.sampler, replay_log_prob(tree, cfg.spec, cfg.mu))
        )
        sys.stdout.write(report.to_text())
    else:
        sys.stdout.write(dumps_tree(tree))


def analyze_report(tree, cfg: ExperimentConfig, checkpoints=None) -> Report:
    ll = log_likelihood(tree, cfg.spec, cfg.mu)
    report = Report()
    report.add(
        "log_likelihood",
        ("n", "log_prob[nats]", "color_term[nats]", "numerator_term[nats]", "normalizer_term[nats]",
         "raw_rate[nats]", "log_factorial_term[nats]", "stirling_corrected_rate[nats]"),
    ).rows.append(
        (ll.n, ll.log_prob, ll.color_term, ll.numerator_term, ll.normalizer_term, ll.raw_rate,
         ll.log_factorial_term, ll.stirling_corrected_rate)
    )
    if tree.n < 2:
        return report
    mx = degree_pair_measure(tree)
    report.add("degree_pair_measure", ("k", "a1", "a2", "mass[probability]")).rows.extend(
        (k, a.target, a.newcomer, v) for k, a, v in mx.items()
    )
    times = checkpoints if checkpoints is not None else (cfg.checkpoints or (0.25, 0.5, 0.75, 1.0))
    times = [t for t in times if checkpoint_index(tree.n, t) >= 2]
    if times:
        nu = path_measure(tree, times)
        section = report.add("path_measure", ("t", "k", "a1", "a2", "mass[probability]"))
        for t, snap in nu.checkpoints:
            section.rows.extend((t, k, a.target, a.newcomer, v) for k, a, v in snap.items())
    snap = degree_snapshot(tree)
    sym = tree.alphabet.symbols
    report.add("final_degrees", ("k", "color", "mass[probability]")).rows.extend(
        (int(k), sym[b], float(snap[k, b])) for k, b in zip(*np.nonzero(snap))
    )
    return report


def cmd_analyze(args) -> None:
    with open(args.infile, encoding="utf-8") as fh:
        tree = read_tree(fh)
    cfg = _config(args, tree.alphabet.symbols)
    if cfg.spec.alphabet != tree.alphabet:
        raise FitPAError("tree alphabet does not match the model alphabet")
    _emit(analyze_report(tree, cfg, args.checkpoints).to_text(), args.out)


def cmd_oracle_dump(args) -> None:
    cfg = _config(args)
    _emit(dumps_enumeration(enumerate_trees(cfg.spec, cfg.mu, cfg.n)), args.out)


def _experiment(runner):
    def run(args) -> None:
        cfg = _config(args)
        _emit(runner(cfg, jobs=args.jobs).to_text(), args.out)

    return run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fitpa", description="Coloured preferential-attachment trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n=True, sampler=False):
        p.add_argument("--config", help="TOML experiment configuration")
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--out", help="output file (default: stdout)")
        if n:
            p.add_argument("--n", type=int, help="override run.n")
        if sampler:
            p.add_argument("--sampler", choices=SAMPLERS, help="override run.sampler")

    p = sub.add_parser("generate", help="grow one tree")
    common(p, sampler=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze", help="measures and log-likelihood of a tree file")
    common(p, n=False)
    p.add_argument("--in", dest="infile", required=True, help="tree file")
    p.add_argument("--checkpoints", type=float, nargs="+", help="path-measure times in (0, 1]")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oracle-dump", help="enumerate all trees of size n")
    common(p)
    p.set_defaults(func=cmd_oracle_dump)

    for name, runner in (("lln", run_lln), ("aep", run_aep), ("ldp", run_ldp)):
        p = sub.add_parser(name, help=f"run the {name.upper()} experiment")
        common(p, sampler=True)
        p.add_argument("--jobs", type=int, default=1, help="worker threads for replicas")
        p.set_defaults(func=_experiment(runner))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FitPAError, OSError) as exc:
        print(f"fitpa: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
