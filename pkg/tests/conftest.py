import numpy as np
import pytest

from kpplab import (GrossPitaevskii, LotkaVolterra, Model)


@pytest.fixture
def eq2():
    # symmetric two-component model with unit diffusion: c* = 2, mu* = 1
    L = np.array([[0.9, 0.1], [0.1, 0.9]])
    return Model(np.ones(2), L, LotkaVolterra(np.ones((2, 2))))


@pytest.fixture
def mix():
    # mixed diffusivities; minimal speed has no closed form here
    d = np.array([1.0, 4.0])
    L = np.array([[1.0, 0.5], [0.5, 1.0]])
    return Model(d, L, LotkaVolterra(np.ones((2, 2))))


@pytest.fixture
def asym():
    L = np.array([[0.8, 0.3], [0.2, 0.9]])
    C = np.array([[1.2, 0.4], [0.5, 1.0]])
    return Model(np.ones(2), L, LotkaVolterra(C))


@pytest.fixture
def ext():
    # stable origin: lambda_PF = -0.3
    L = np.array([[-0.8, 0.5], [0.5, -0.8]])
    return Model(np.ones(2), L, LotkaVolterra(np.ones((2, 2))))


@pytest.fixture
def gp():
    L = np.array([[0.5, 0.3], [0.2, 0.7]])
    C = np.array([[1.0, 0.5], [0.5, 1.0]])
    return Model(np.array([1.0, 2.0]), L, GrossPitaevskii(C))


@pytest.fixture
def make_random_model():
    """Factory for seeded random Lotka-Volterra models with unstable origin."""
    def _make(seed: int, n: int = 3) -> Model:
        rng = np.random.default_rng(seed)
        L = rng.uniform(0.05, 1.0, (n, n))
        L[np.diag_indices(n)] = rng.uniform(0.3, 1.2, n)
        C = rng.uniform(0.2, 1.5, (n, n))
        d = rng.uniform(0.5, 2.0, n)
        return Model(d, L, LotkaVolterra(C))
    return _make
