"""Spectral fields: transforms, symmetry checks, dealiasing.

A :class:`SpectralField` wraps complex coefficients on a
:class:`~bqsim.grid.SpectralGrid`.  Scalar fields have shape
(n1, n2, n3); vector fields carry a leading component axis of length
3 or 4 (the 4th component is the buoyancy scalar channel).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .errors import DivergenceError, SymmetryError
from .grid import SpectralGrid

__all__ = [
    "SpectralField",
    "transform_to_physical",
    "transform_to_spectral",
    "dealias",
    "hermitian_residual",
    "divergence_residual",
]

HERMITIAN_TOL = 1e-12
DIVERGENCE_TOL = 1e-8

_RANKS = {(): "scalar", (3,): "vector3", (4,): "vector4"}


@dataclass
class SpectralField:
    """Complex spectral coefficients plus their grid."""

    grid: SpectralGrid
    coeffs: np.ndarray

    def __post_init__(self):
        lead = self.coeffs.shape[:-3]
        if self.coeffs.shape[-3:] != self.grid.shape or lead not in _RANKS:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} incompatible with grid {self.grid.shape}"
            )
        if not np.iscomplexobj(self.coeffs):
            self.coeffs = self.coeffs.astype(np.complex128)

    @property
    def rank(self) -> str:
        return _RANKS[self.coeffs.shape[:-3]]

    @property
    def ncomp(self) -> int:
        lead = self.coeffs.shape[:-3]
        return 1 if lead == () else lead[0]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())


def _mirror_conj(coeffs: np.ndarray) -> np.ndarray:
    """conj(f_hat(-k)) indexed like f_hat(k); works on the last 3 axes."""
    rev = coeffs[..., ::-1, ::-1, ::-1]
    return np.conj(np.roll(rev, shift=(1, 1, 1), axis=(-3, -2, -1)))


def hermitian_residual(field: SpectralField) -> float:
    """Relative departure from coeff(-k) = conj(coeff(k))."""
    c = field.coeffs
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(c - _mirror_conj(c))) / scale)


def divergence_residual(field: SpectralField) -> float:
    """Relative size of k . v_hat over the first three components."""
    if field.rank == "scalar":
        raise ValueError("divergence is defined for vector fields only")
    g = field.grid
    c = field.coeffs
    div = g.kx * c[0] + g.ky * c[1] + g.kz * c[2]
    scale = np.sqrt(np.sum(g.k2 * (np.abs(c[0]) ** 2 + np.abs(c[1]) ** 2 + np.abs(c[2]) ** 2)))
    if scale == 0.0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(div) ** 2)) / scale)


def check_hermitian(field: SpectralField, tol: float = HERMITIAN_TOL) -> None:
    res = hermitian_residual(field)
    if res > tol:
        raise SymmetryError(f"Hermitian symmetry violated: residual {res:.3e} > {tol:.1e}")


def check_divergence_free(field: SpectralField, tol: float = DIVERGENCE_TOL) -> None:
    res = divergence_residual(field)
    if res > tol:
        raise DivergenceError(f"divergence residual {res:.3e} > {tol:.1e}")


def transform_to_physical(field: SpectralField, check: bool = True) -> np.ndarray:
    """Inverse transform to real collocation values.

    Raises :class:`SymmetryError` if the coefficients are not Hermitian
    symmetric within tolerance (set ``check=False`` to skip, e.g. in
    hot loops that maintain symmetry by construction).
    """
    if check:
        check_hermitian(field)
    phys = sfft.ifftn(field.coeffs, axes=(-3, -2, -1), norm="forward")
    return np.ascontiguousarray(phys.real)


def transform_to_spectral(grid: SpectralGrid, values: np.ndarray) -> SpectralField:
    """Forward transform of real collocation values."""
    coeffs = sfft.fftn(np.asarray(values, dtype=np.float64), axes=(-3, -2, -1), norm="forward")
    return SpectralField(grid, coeffs)


def dealias(field: SpectralField) -> SpectralField:
    """Two-thirds rule truncation; idempotent."""
    return SpectralField(field.grid, field.coeffs * field.grid.dealias_mask)
