import numpy as np
import pytest

from replab import build_grid, solve_torsion


@pytest.fixture(scope="session")
def grid99():
    return build_grid(1, [0.0, 1.0], 99)


@pytest.fixture(scope="session")
def torsion99(grid99):
    return solve_torsion(grid99)


@pytest.fixture(scope="session")
def grid49():
    return build_grid(1, [0.0, 1.0], 49)


@pytest.fixture(scope="session")
def torsion49(grid49):
    return solve_torsion(grid49)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240611)
