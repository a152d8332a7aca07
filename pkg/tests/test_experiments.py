import dataclasses

import pytest

from fitpa.cli import _default_config
from fitpa.experiments import run_aep, run_ldp, run_lln
from fitpa.optimize import CellConstraint
from fitpa.tilt import TiltSpec

from conftest import H_SINGLE, H_TAIL_SINGLE


def cfg(**changes):
    return dataclasses.replace(_default_config(), **changes)


def test_aep_rate_vanishes_at_two_vertices():
    report = run_aep(cfg(n_grid=(2,), replicas=3))
    assert [r[2] for r in report.section("replicas").rows] == [0.0, 0.0, 0.0]
    h, bound, signed, h_tail, tail_bound = report.section("limits").rows[0]
    assert h == pytest.approx(H_SINGLE, abs=bound + 1e-12)
    assert signed == pytest.approx(-h)
    assert h_tail == pytest.approx(H_TAIL_SINGLE, abs=tail_bound + 1e-12)


def test_lln_tail_target_is_closer():
    report = run_lln(cfg(n_grid=(3000,), replicas=3, k_max=3))
    n, reps, dev_pi, dev_tail, pair_mean, pair_max = report.section("summary").rows[0]
    assert (n, reps) == (3000, 3)
    assert dev_tail < 0.05 < dev_pi
    assert pair_max <= 1e-12
    assert len(report.section("cells").rows) == 4


def test_ldp_sure_event_reports_zero_rate():
    report = run_ldp(cfg(n_grid=(20,), replicas=10, K=5))
    K, J, color, cond, converged, _ = report.section("optimizer").rows[0]
    assert converged and J < 0  # unconstrained truncated minimum lies below zero
    row = report.section("estimates").rows[0]
    assert row[4] == 1.0 and row[6] == 0.0


def test_ldp_with_tilt_and_constraint():
    constraint = CellConstraint.cell(0, ("x", "x"), ">=", 0.75)
    tilt = TiltSpec(
        [0.0], [[[1.5]], [[0.0]]]
    )
    report = run_ldp(cfg(n_grid=(40,), replicas=500, seed=1, K=10, tilt=tilt, constraints=(constraint,)))
    J = report.section("optimizer").rows[0][1]
    n, reps, seed, hits, p_hat, std_err, log_rate, minus_J, excess = report.section("estimates").rows[0]
    assert J > 0 and minus_J == -J
    assert hits > 0 and 0 < p_hat < 1
    assert excess == pytest.approx(log_rate + J)
