import numpy as np
import pytest

from ldspectrum import DivergentPM, GaussianIID, Grid, InterleavedGaussian, MixedGaussian
from ldspectrum.spectrum import ShrinkSchedule, estimate_rate_curve


@pytest.fixture(scope="session")
def std_gaussian():
    return GaussianIID(0.0, 1.0)


@pytest.fixture(scope="session")
def mixed():
    return MixedGaussian(GaussianIID(-1.0, 1.0), GaussianIID(1.0, 1.0), 0.5, 0.5)


@pytest.fixture(scope="session")
def interleaved():
    return InterleavedGaussian(GaussianIID(-1.0, 1.0), GaussianIID(1.0, 1.0))


@pytest.fixture(scope="session")
def divergent():
    return DivergentPM()


@pytest.fixture(scope="session")
def schedule():
    return ShrinkSchedule.default(i_max=5, n_max=10_000)


@pytest.fixture(scope="session")
def r_grid():
    return Grid(-3.0, 3.0, 0.05)


@pytest.fixture(scope="session")
def theta_grid():
    return Grid(-3.0, 3.0, 0.05)


@pytest.fixture(scope="session")
def curves(std_gaussian, mixed, interleaved, divergent, r_grid, schedule):
    """Rate curves for the whole bundle, shared across test modules."""
    return {
        "gaussian": estimate_rate_curve(std_gaussian, r_grid, schedule),
        "mixed": estimate_rate_curve(mixed, r_grid, schedule),
        "interleaved": estimate_rate_curve(interleaved, r_grid, schedule),
        "divergent": estimate_rate_curve(divergent, r_grid, schedule),
    }


def min_parabolas(rs):
    rs = np.asarray(rs, dtype=float)
    return np.minimum((rs - 1.0) ** 2 / 2.0, (rs + 1.0) ** 2 / 2.0)


def max_parabolas(rs):
    rs = np.asarray(rs, dtype=float)
    return np.maximum((rs - 1.0) ** 2 / 2.0, (rs + 1.0) ** 2 / 2.0)
