import numpy as np
import pytest

from fslab.spectral import Field, make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid2d():
    return make_grid(2, 16, 2.0 * np.pi)


@pytest.fixture
def grid1d():
    return make_grid(1, 16, 2.0 * np.pi)


def random_field(grid, rng):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, vals)


def plane_wave(grid, mode):
    """e^{i xi0.x} with xi0 the lattice point at integer index offset `mode`."""
    x = grid.coords_1d()
    mesh = np.meshgrid(*([x] * grid.n), indexing="ij")
    phase = np.zeros(grid.shape)
    for axis, q in enumerate(mode):
        phase = phase + grid.freq_1d[grid.m // 2 + q] * mesh[axis]
    return Field(grid, np.exp(1j * phase))
