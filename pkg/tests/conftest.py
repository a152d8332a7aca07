import numpy as np
import pytest

from fitpa.model import ColorLaw, build_fitness_spec

# -sum_k pi(k) log((k+1)/2) for pi(k) = 4/((k+1)(k+2)(k+3)), by Euler-Maclaurin
# summation in 30-digit arithmetic (see test_analytics.test_entropy_rate_series_oracle).
H_SINGLE = 0.3196509654865377
# the same sum with pi replaced by the tail law 2/((k+2)(k+3))
H_TAIL_SINGLE = -0.5104177361896650


def single():
    spec = build_fitness_spec(1.0, 1.0, ["x"])
    return spec, ColorLaw.uniform(spec.alphabet)


def two_symmetric(p=(0.3, 0.7)):
    spec = build_fitness_spec(1.0, 1.0, ["x", "y"])
    return spec, ColorLaw(spec.alphabet, np.array(p))


def two_asymmetric():
    gamma = [[1.5, 0.5], [1.0, 0.25]]
    beta = [[0.5, 1.5], [1.0, 1.75]]
    spec = build_fitness_spec(gamma, beta, ["x", "y"])
    return spec, ColorLaw(spec.alphabet, np.array([0.3, 0.7]))


@pytest.fixture
def single_model():
    return single()


@pytest.fixture
def symmetric_model():
    return two_symmetric()


@pytest.fixture
def asymmetric_model():
    return two_asymmetric()
