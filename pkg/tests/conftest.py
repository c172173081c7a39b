import numpy as np
import pytest

from bqsim.field import SpectralField, _mirror_conj
from bqsim.grid import make_grid


def hermitian_scalar(rng, grid, band=(1.0, 5.0), scale=1.0):
    """Seeded band-limited scalar with Hermitian symmetry (real in space)."""
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    mask = (grid.kmag >= band[0]) & (grid.kmag <= band[1]) & grid.dealias_mask
    z = z * mask
    return scale * 0.5 * (z + _mirror_conj(z))


def divfree_vector3(rng, grid, band=(1.0, 5.0), scale=1.0):
    """curl of a random vector potential: divergence-free, mean-free, real."""
    pot = np.stack([hermitian_scalar(rng, grid, band) for _ in range(3)])
    out = np.empty_like(pot)
    out[0] = 1j * (grid.ky * pot[2] - grid.kz * pot[1])
    out[1] = 1j * (grid.kz * pot[0] - grid.kx * pot[2])
    out[2] = 1j * (grid.kx * pot[1] - grid.ky * pot[0])
    return scale * out


def random_vector4(rng, grid, band=(1.0, 5.0), scale=1.0):
    """Divergence-free vorticity plus an independent scalar, as one stack."""
    w = divfree_vector3(rng, grid, band, scale)
    temp = hermitian_scalar(rng, grid, band, scale)[None]
    return np.concatenate([w, temp], axis=0)


@pytest.fixture
def grid16():
    return make_grid(16, 16, 16)


@pytest.fixture
def grid32():
    return make_grid(32, 32, 32)


def as_field(grid, coeffs):
    return SpectralField(grid, coeffs)
