import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fitpa.errors import ImpossibleTree, TooSmall
from fitpa.growth import generate
from fitpa.measures import (
    DegreePairMeasure,
    degree_pair_measure,
    degree_snapshot,
    empirical_entropy_rate,
    log_factorial,
    log_likelihood,
    normalizers,
    path_measure,
)
from fitpa.model import ColorLaw, build_fitness_spec
from fitpa.oracle import enumerate_trees
from fitpa.tree import tree_from_parents

from conftest import single, two_asymmetric, two_symmetric


def _cells(measure):
    return {(k, tuple(a)): v for k, a, v in measure.items()}


def test_measure_three_vertices():
    tree = tree_from_parents(["x"], [0, 0, 0], [-1, 0, 0])
    assert _cells(degree_pair_measure(tree)) == {(0, ("x", "x")): 0.5, (1, ("x", "x")): 0.5}


def test_measure_two_vertices():
    tree = tree_from_parents(["x", "y"], [1, 0], [-1, 0])
    assert _cells(degree_pair_measure(tree)) == {(0, ("y", "x")): 1.0}


def test_measure_star():
    tree = tree_from_parents(["x"], [0] * 5, [-1, 0, 0, 0, 0])
    assert _cells(degree_pair_measure(tree)) == {(k, ("x", "x")): 0.25 for k in range(4)}


def test_measure_needs_an_edge():
    with pytest.raises(TooSmall):
        degree_pair_measure(tree_from_parents(["x"], [0], [-1]))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 400), seed=st.integers(0, 2**40))
def test_measure_is_exact_probability(n, seed):
    spec, mu = two_asymmetric()
    tree = generate(spec, mu, n, seed)
    m = degree_pair_measure(tree)
    counts = np.rint(m.mass * (n - 1)).astype(int)
    assert counts.sum() == n - 1
    assert np.allclose(m.mass, counts / (n - 1), atol=0, rtol=1e-15)
    assert sum(Fraction(int(c), n - 1) for c in counts.ravel()) == 1
    # summing over degrees and target colours gives newcomer colour counts
    newcomer = m.pair_marginal().sum(axis=0) * (n - 1)
    assert np.allclose(newcomer, np.bincount(tree.colors[1:], minlength=2))


def test_measure_table_order():
    tree = tree_from_parents(["x", "y"], [0, 1, 0, 1], [-1, 0, 0, 1])
    text = degree_pair_measure(tree).to_table()
    assert text.splitlines()[0] == "k,a1,a2,mass[probability]"
    rows = [line.split(",")[:3] for line in text.splitlines()[1:]]
    assert rows == sorted(rows, key=lambda r: (int(r[0]), "xy".index(r[1]), "xy".index(r[2])))


def test_path_measure_slice_example():
    tree = tree_from_parents(["x"], [0, 0, 0, 0], [-1, 0, 1, 0])
    nu = path_measure(tree, [0.75])  # m = 3: vertices 1, 2 with degrees (1, 0)
    assert _cells(nu.checkpoints[0][1]) == {(0, ("x", "x")): 0.5, (1, ("x", "x")): 0.5}


def test_path_measure_first_snapshot():
    tree = tree_from_parents(["x", "y"], [1, 0, 0, 0], [-1, 0, 0, 0])
    nu = path_measure(tree, [0.5])  # m = 2
    assert _cells(nu.checkpoints[0][1]) == {(0, ("y", "x")): 1.0}


def test_path_measure_restricts_to_newcomer_colour():
    tree = tree_from_parents(["x", "y"], [0, 1, 0, 1, 1], [-1, 0, 0, 1, 2])
    nu = path_measure(tree, [0.8])  # m = 4, newcomer colour y
    snap = nu.checkpoints[0][1]
    assert snap.mass[:, :, 0].sum() == 0
    assert snap.total == pytest.approx(1.0)


def test_path_measure_final_equals_measure():
    spec, mu = two_asymmetric()
    tree = generate(spec, mu, 300, 4)
    nu = path_measure(tree, [0.1, 0.5, 1.0])
    final = nu.checkpoints[-1][1]
    assert np.array_equal(final.mass, degree_pair_measure(tree).mass)
    for _, snap in nu.checkpoints:
        assert snap.total == pytest.approx(1.0, abs=1e-12)


def test_path_measure_validation():
    tree = tree_from_parents(["x"], [0, 0, 0], [-1, 0, 0])
    with pytest.raises(TooSmall):
        path_measure(tree, [0.3])
    with pytest.raises(ValueError):
        path_measure(tree, [1.0, 0.9])


def test_degree_snapshot_is_unrestricted():
    tree = tree_from_parents(["x", "y"], [0, 1, 0], [-1, 0, 0])
    snap = degree_snapshot(tree)
    assert snap[2, 0] == pytest.approx(1 / 3)
    assert snap[0].sum() == pytest.approx(2 / 3)


def test_log_likelihood_examples():
    spec, mu = single()
    two = tree_from_parents(["x"], [0, 0], [-1, 0])
    assert log_likelihood(two, spec, mu).log_prob == 0.0
    three = tree_from_parents(["x"], [0, 0, 0], [-1, 0, 0])
    report = log_likelihood(three, spec, mu)
    assert report.log_prob == pytest.approx(math.log(2 / 3), abs=1e-15)
    assert report.log_prob == report.color_term + report.numerator_term + report.normalizer_term


def test_star_probability_at_four():
    spec, mu = single()
    star = tree_from_parents(["x"], [0] * 4, [-1, 0, 0, 0])
    # W_3 = 3 with chosen weight 2, W_4 = 5 with chosen weight 3
    assert math.exp(log_likelihood(star, spec, mu).log_prob) == pytest.approx(2 / 3 * 3 / 5, abs=1e-15)


def test_normalizers_are_exact():
    spec, mu = two_asymmetric()
    tree = generate(spec, mu, 60, 8)
    W = normalizers(tree, spec)
    for m in range(1, tree.n):
        deg = np.bincount(tree.parents[1:m], minlength=m)
        x = tree.colors[m]
        direct = sum(spec.f(deg[i], tree.colors[i], x) for i in range(m))
        assert W[m - 1] == pytest.approx(direct, rel=1e-14)


def test_impossible_tree_reports_step():
    spec = build_fitness_spec(2.0, 0.0, ["x"])
    mu = ColorLaw.uniform(spec.alphabet)
    tree = tree_from_parents(["x"], [0, 0], [-1, 0])
    with pytest.raises(ImpossibleTree, match="m=2"):
        log_likelihood(tree, spec, mu)


@pytest.mark.parametrize("model", [single, two_symmetric, two_asymmetric])
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_likelihood_matches_enumeration(model, n):
    spec, mu = model()
    enum = enumerate_trees(spec, mu, n)
    assert abs(enum.probs.sum() - 1.0) <= 1e-10
    for tree, lp in zip(enum.trees, enum.log_probs):
        assert math.exp(log_likelihood(tree, spec, mu).log_prob) == pytest.approx(math.exp(lp), abs=1e-12)


def test_log_factorial_switch_is_continuous():
    assert log_factorial(0) == 0.0 and log_factorial(1) == 0.0
    assert log_factorial(1000) == pytest.approx(math.lgamma(1001), rel=1e-14)
    assert log_factorial(1001) == pytest.approx(log_factorial(1000) + math.log(1001), rel=1e-14)


def test_entropy_rate_at_two_is_zero():
    spec, mu = single()
    assert empirical_entropy_rate(tree_from_parents(["x"], [0, 0], [-1, 0]), spec, mu) == 0.0


def test_raw_and_corrected_rates_relate():
    spec, mu = two_symmetric()
    report = log_likelihood(generate(spec, mu, 2000, 1), spec, mu)
    assert report.raw_rate * report.n - report.log_factorial_term == pytest.approx(
        report.stirling_corrected_rate * report.n, rel=1e-12
    )


def test_measure_accepts_overflow():
    m = DegreePairMeasure.from_cells(["x"], {(0, ("x", "x")): 0.5}, overflow=[[0.5]])
    assert m.total == 1.0 and m.has_overflow
    assert ">0" in m.to_table()
