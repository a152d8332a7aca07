"""Simulation experiments: weak law (LLN), equipartition (AEP) and large-deviation decay (LDP).

Replica ``r`` of a run seeded with ``seed`` is grown from ``replica_seed(seed, r)``.
Replicas may run on several threads (``jobs``); results are collected in
replica order, so reports do not depend on ``jobs``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytics import (
    attachment_degree_product,
    attachment_entropy_rate,
    bits_bound,
    entropy_rate,
    stationary_product,
)
from .config import ExperimentConfig
from .growth import generate
from .measures import degree_pair_measure, log_likelihood
from .optimize import constraint_event, minimize_rate
from .report import table
from .rng import replica_seed
from .tilt import TiltSpec, importance_estimate


@dataclass
class Section:
    title: str
    header: tuple[str, ...]
    rows: list = field(default_factory=list)


@dataclass
class Report:
    """Ordered report sections, rendered as ``# title`` followed by a CSV table."""

    sections: list[Section] = field(default_factory=list)

    def add(self, title: str, header: Sequence[str]) -> Section:
        section = Section(title, tuple(header))
        self.sections.append(section)
        return section

    def section(self, title: str) -> Section:
        for s in self.sections:
            if s.title == title:
                return s
        raise KeyError(title)

    def to_text(self) -> str:
        return "\n".join(f"# {s.title}\n" + table(s.header, s.rows) for s in self.sections)


def _map(fn: Callable, items, jobs: int) -> list:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _padded(mass: np.ndarray, kmax: int) -> np.ndarray:
    out = np.zeros((kmax + 1,) + mass.shape[1:])
    top = min(kmax, mass.shape[0] - 1)
    out[: top + 1] = mass[: top + 1]
    return out


def run_lln(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    """Deviation of ``M_X`` from the stationary product, per cell and over seeds.

    For each ``n`` in the grid and each replica, records ``|M_X(k,a) - target(k,a)|``
    for ``k <= k_max`` with two targets: the stationary product
    ``pi_f(k|a)(mu x mu)(a)`` and the tail law
    ``(1 - sum_{j<=k} pi_f(j|a))(mu x mu)(a)``, together with the pair-marginal
    deviation ``max_a |sum_k M_X(k,a) - (mu x mu)(a)|``.
    """
    spec, mu, kmax = cfg.spec, cfg.mu, cfg.k_max
    sym = spec.alphabet.symbols
    pi = stationary_product(spec, mu, cfg.tolerance, kmax=max(kmax, 1)).mass[: kmax + 1]
    tail = attachment_degree_product(spec, mu, cfg.tolerance, kmax=max(kmax, 1)).mass[: kmax + 1]
    pair_law = mu.product()
    report = Report()
    cells = report.add(
        "cells",
        ("n", "k", "a1", "a2", "pi_product[probability]", "tail_law[probability]",
         "mean_abs_dev_pi[probability]", "mean_abs_dev_tail[probability]"),
    )
    summary = report.add(
        "summary",
        ("n", "replicas", "mean_max_dev_pi[probability]", "mean_max_dev_tail[probability]",
         "mean_pair_marginal_dev[probability]", "max_pair_marginal_dev[probability]"),
    )
    for n in cfg.n_grid:

        def one(r, n=n):
            tree = generate(spec, mu, n, replica_seed(cfg.seed, r), cfg.sampler)
            m = degree_pair_measure(tree)
            low = _padded(m.mass, kmax)
            return np.abs(low - pi), np.abs(low - tail), float(np.max(np.abs(m.pair_marginal() - pair_law)))

        results = _map(one, range(cfg.replicas), jobs)
        dev_pi = np.array([r[0] for r in results])
        dev_tail = np.array([r[1] for r in results])
        pair_dev = np.array([r[2] for r in results])
        mean_pi = dev_pi.mean(axis=0)
        mean_tail = dev_tail.mean(axis=0)
        for k in range(kmax + 1):
            for b in range(len(sym)):
                for x in range(len(sym)):
                    cells.rows.append(
                        (n, k, sym[b], sym[x], pi[k, b, x], tail[k, b, x], mean_pi[k, b, x], mean_tail[k, b, x])
                    )
        summary.rows.append(
            (
                n,
                cfg.replicas,
                float(dev_pi.reshape(cfg.replicas, -1).max(axis=1).mean()),
                float(dev_tail.reshape(cfg.replicas, -1).max(axis=1).mean()),
                float(pair_dev.mean()),
                float(pair_dev.max()),
            )
        )
    return report


def run_aep(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    """Stirling-corrected rate ``D_n`` per replica against the analytic entropy rate ``h``.

    ``h_tail`` is the same limit with the degree law replaced by the tail law;
    it is reported alongside because it is the value ``D_n`` settles at.
    """
    spec, mu = cfg.spec, cfg.mu
    h = entropy_rate(spec, mu, cfg.tolerance)
    h_tail = attachment_entropy_rate(spec, mu, cfg.tolerance)
    report = Report()
    limits = report.add(
        "limits",
        ("h[nats]", "h_error_bound[nats]", "signed_limit[nats]", "h_tail[nats]", "h_tail_error_bound[nats]"),
    )
    limits.rows.append((h.value, h.error_bound, h.signed_limit, h_tail.value, h_tail.error_bound))
    per = report.add(
        "replicas",
        ("n", "replica", "D_n[nats]", "raw_rate[nats]", "log_factorial_term[nats]", "h[nats]", "bits_bound[bits]"),
    )
    summary = report.add(
        "summary",
        ("n", "replicas", "mean_D_n[nats]", "mean_gap[nats]", "std_gap[nats]", "mean_gap_tail[nats]"),
    )
    for n in cfg.n_grid:

        def one(r, n=n):
            tree = generate(spec, mu, n, replica_seed(cfg.seed, r), cfg.sampler)
            return log_likelihood(tree, spec, mu)

        reports = _map(one, range(cfg.replicas), jobs)
        rates = np.array([rep.stirling_corrected_rate for rep in reports])
        bits = bits_bound(n, h.value) if h.value >= 0 else math.nan
        for r, rep in enumerate(reports):
            per.rows.append((n, r, rep.stirling_corrected_rate, rep.raw_rate, rep.log_factorial_term, h.value, bits))
        gaps = rates - h.value
        std = float(gaps.std(ddof=1)) if len(gaps) > 1 else 0.0
        summary.rows.append((n, cfg.replicas, float(rates.mean()), float(gaps.mean()), std, float((rates - h_tail.value).mean())))
    return report


def run_ldp(cfg: ExperimentConfig, jobs: int = 1) -> Report:
    """Estimated ``(1/n) log P(M_X in event)`` next to ``-J*`` from the optimiser.

    The event is the conjunction of the configured cell constraints (always
    true without constraints).  Estimates use the configured tilt, or plain
    Monte Carlo (identity tilt) when none is given.
    """
    spec, mu = cfg.spec, cfg.mu
    tilt = cfg.tilt if cfg.tilt is not None else TiltSpec.identity_for(len(spec.alphabet))
    event = constraint_event(cfg.constraints)
    best = minimize_rate(spec, mu, cfg.constraints, K=cfg.K, marginal_mode=cfg.marginal_mode, jobs=jobs)
    report = Report()
    opt = report.add("optimizer", ("K", "J_star[nats]", "color_term[nats]", "conditional_term[nats]", "converged", "iterations"))
    opt.rows.append((cfg.K, best.value, best.rate.color_term, best.rate.conditional_term, best.converged, best.iterations))
    rows = report.add(
        "estimates",
        ("n", "replicas", "seed", "hits", "p_hat[probability]", "std_err[probability]", "log_rate[nats]",
         "minus_J_star[nats]", "excess[nats]"),
    )
    for n in cfg.n_grid:
        est = importance_estimate(event, spec, mu, tilt, n, cfg.replicas, cfg.seed, jobs)
        rows.rows.append(
            (n, est.replicas, est.seed, est.hits, est.p_hat, est.std_err, est.log_rate, -best.value,
             est.log_rate + best.value)
        )
    return report
