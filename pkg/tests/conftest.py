import numpy as np
import pytest

from becqubit import default_config, find_crossover, measure, model_from_config


@pytest.fixture(scope="session")
def default_model():
    return model_from_config(default_config())


@pytest.fixture(scope="session")
def default_measure(default_model):
    return measure(default_model)


@pytest.fixture(scope="session")
def crossovers():
    """The three crossover bisections; computed once, shared by several tests."""
    return {dim: find_crossover(dim) for dim in (3, 2, 1)}


@pytest.fixture
def rng():
    return np.random.default_rng(20120731)


def random_config(rng, dimension=None):
    """Random valid configuration within the regimes the model is built for."""
    from becqubit.constants import A_RB, BOHR_RADIUS

    dim = int(dimension if dimension is not None else rng.integers(1, 4))
    cap = {1: 1.0, 2: 2.0, 3: 3.0}[dim]
    return default_config(
        dimension=dim,
        a_B=float(rng.uniform(0.0, cap)) * A_RB,
        a_AB=float(rng.uniform(20.0, 100.0)) * BOHR_RADIUS,
        L=float(rng.uniform(40e-9, 120e-9)),
        tau=float(rng.uniform(30e-9, 60e-9)),
        n0=float(rng.uniform(3e19, 3e20)),
    )
