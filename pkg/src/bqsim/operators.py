"""Spectral differential operators.

All operators are diagonal multipliers in spectral space.  Inverse
Laplacians zero their kernel modes (k = 0, and the k_h = 0 fiber for the
horizontal inverse); callers that need a different gauge must handle
those modes themselves.
"""

from __future__ import annotations

import numpy as np

from .field import SpectralField
from .grid import SpectralGrid

__all__ = [
    "derivative",
    "grad_h",
    "laplacian",
    "laplacian_h",
    "inv_laplacian",
    "inv_laplacian_h",
    "curl",
    "velocity_from_vorticity",
]


def _k_axis(grid: SpectralGrid, axis: int) -> np.ndarray:
    if axis == 1:
        return grid.kx
    if axis == 2:
        return grid.ky
    if axis == 3:
        return grid.kz
    raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def derivative(field: SpectralField, axis: int) -> SpectralField:
    """d/dx_axis, i.e. multiplication by i*k_axis."""
    return SpectralField(field.grid, 1j * _k_axis(field.grid, axis) * field.coeffs)


def grad_h(field: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Horizontal gradient (d/dx1, d/dx2)."""
    return derivative(field, 1), derivative(field, 2)


def laplacian(field: SpectralField) -> SpectralField:
    return SpectralField(field.grid, -field.grid.k2 * field.coeffs)


def laplacian_h(field: SpectralField) -> SpectralField:
    return SpectralField(field.grid, -field.grid.kh2 * field.coeffs)


def inv_laplacian(field: SpectralField) -> SpectralField:
    """Inverse of the full Laplacian; the k = 0 mode maps to 0."""
    return SpectralField(field.grid, -field.grid.inv_k2 * field.coeffs)


def inv_laplacian_h(field: SpectralField) -> SpectralField:
    """Inverse of the horizontal Laplacian; the k_h = 0 fiber maps to 0."""
    return SpectralField(field.grid, -field.grid.inv_kh2 * field.coeffs)


def curl_arrays(grid: SpectralGrid, v: np.ndarray) -> np.ndarray:
    """Spectral curl of a (3, n1, n2, n3) coefficient array: i k x v_hat."""
    out = np.empty_like(v[:3])
    ikx, iky, ikz = 1j * grid.kx, 1j * grid.ky, 1j * grid.kz
    out[0] = iky * v[2] - ikz * v[1]
    out[1] = ikz * v[0] - ikx * v[2]
    out[2] = ikx * v[1] - iky * v[0]
    return out


def curl(field: SpectralField) -> SpectralField:
    if field.rank == "scalar":
        raise ValueError("curl requires a vector field")
    return SpectralField(field.grid, curl_arrays(field.grid, field.coeffs))


def velocity_from_vorticity_arrays(grid: SpectralGrid, w: np.ndarray) -> np.ndarray:
    """Biot-Savart: u_hat = (i k x w_hat) / |k|^2, with u_hat(0) = 0."""
    return curl_arrays(grid, w) * grid.inv_k2


def velocity_from_vorticity(field: SpectralField) -> SpectralField:
    if field.rank == "scalar":
        raise ValueError("Biot-Savart requires a vector field")
    return SpectralField(field.grid, velocity_from_vorticity_arrays(field.grid, field.coeffs))
