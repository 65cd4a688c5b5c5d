import numpy as np
import pytest

import flatfronts as ff


@pytest.fixture(scope="session")
def linear_family():
    """Standard example: linear map with unit steps, t = 1/2, 10x10."""
    grid = ff.QuadGrid(10, 10)
    hmap = ff.make_linear(grid, 1.0, 1.0)
    return ff.build_front(hmap, 0.5)


@pytest.fixture(scope="session")
def small_family():
    grid = ff.QuadGrid(5, 5)
    hmap = ff.make_linear(grid, 1.0, 1.0)
    return ff.build_front(hmap, 0.5)


@pytest.fixture(scope="session")
def generic_map():
    """A holomorphic map without the lattice symmetries: Moebius of linear."""
    grid = ff.QuadGrid(8, 8)
    hmap = ff.make_linear(grid, 1.0, 1.0)
    return ff.make_moebius(hmap, 1.0, 0.3 - 0.2j, 0.12 + 0.08j, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(987123)
