import numpy as np
import pytest

from uniformizer.factors import PeriodData
from uniformizer.fuchsian import enumerate_elements, punctured_torus_group, regular_octagon_group


@pytest.fixture(scope="session")
def torus():
    """The (3,3) once-punctured torus, the main fixture group."""
    return punctured_torus_group(3, 3)


@pytest.fixture(scope="session")
def torus_e8(torus):
    return enumerate_elements(torus, 8)


@pytest.fixture(scope="session")
def torus_e10(torus):
    return enumerate_elements(torus, 10)


@pytest.fixture(scope="session")
def octagon():
    return regular_octagon_group()


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def random_disc_points(rng, n, rmax=0.9):
    r = rmax * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def random_words(rng, n, letters="abAB", max_len=5):
    out = []
    for _ in range(n):
        k = int(rng.integers(0, max_len + 1))
        out.append("".join(rng.choice(list(letters), k)))
    return out


def random_period_data(rng, g, zero_sigma=False):
    A = rng.normal(size=(g, g))
    Y = A @ A.T + 0.5 * np.eye(g)
    X = rng.normal(size=(g, g))
    tau = 0.5 * (X + X.T) + 1j * Y
    sigma = np.zeros(g) if zero_sigma else rng.normal(size=g) + 1j * rng.normal(size=g)
    sigma_p = rng.normal(size=g) + 1j * rng.normal(size=g)
    return PeriodData(tau, sigma, sigma_p)
