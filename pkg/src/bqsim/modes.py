"""Exact diagonalization of the linearized buoyancy-vorticity coupling.

Per wavevector k with k_h != 0 the linear system splits into one
stationary family and two dispersive families oscillating at the
frequency sigma * |k_h|/|k|.  A :class:`ModeState` stores the three
coefficient fields (stream potential ``psi`` and wave amplitudes
``a``, ``b``) on the full spectral lattice.

Spectral representation used by project/reconstruct (stream potential
psi_hat, wave amplitudes a_hat, b_hat):

    s_hat     = (k1 k3 psi, k2 k3 psi, -|k_h|^2 psi, 0)
    d_pm_hat  = (-i k2 |k| c, +i k1 |k| c, 0, +-i |k_h| c),  c = a or b

with the inversion

    psi = -w3 / |k_h|^2
    a+b = (k1 w2 - k2 w1) / (i |k| |k_h|^2)
    a-b = T / (i |k_h|)

Degenerate fiber k_h = 0: the linear coupling vanishes identically
there, so the fiber is carried as frozen channels stored inside the
three coefficient arrays at the k_h = 0 slots: ``psi`` holds w1_hat,
``a`` holds w2_hat, ``b`` holds T_hat (w3_hat vanishes on the fiber for
any divergence-free field).  All free phases equal 1 on the fiber, so
``free_propagate`` leaves it untouched, matching the vanishing of the
linear coupling.

Reality of reconstructed fields corresponds to psi being Hermitian
symmetric and the cross symmetry a_hat(-k) = conj(b_hat(k)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModeError, DivergenceError
from .field import SpectralField, check_divergence_free
from .grid import SpectralGrid
from .operators import velocity_from_vorticity_arrays

__all__ = [
    "dispersion_relation",
    "EigenBasis",
    "eigen_basis",
    "ModeState",
    "project_modes",
    "reconstruct_modes",
    "reconstruct_velocity",
    "free_propagate",
]


def dispersion_relation(xi) -> float:
    """|xi_h| / |xi| for a single wavevector xi != 0."""
    x1, x2, x3 = (float(v) for v in xi)
    kh = np.hypot(x1, x2)
    k = np.sqrt(x1 * x1 + x2 * x2 + x3 * x3)
    if k == 0.0:
        raise ValueError("dispersion relation undefined at xi = 0")
    return kh / k


@dataclass(frozen=True)
class EigenBasis:
    """Eigenvectors of the linear coupling at one wavevector.

    ``formulation`` is "vorticity" (state (w1, w2, w3, T)) or "velocity"
    (state (u1, u2, u3, T)).  ``stationary`` spans the zero eigenvalue;
    ``plus``/``minus`` carry ``eigenvalue_plus = i |xi_h|/|xi|`` and its
    conjugate, as eigenvectors of the coupling matrix written in the
    e^{+i x.xi} transform convention.
    """

    xi: tuple[float, float, float]
    formulation: str
    stationary: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    eigenvalue_plus: complex
    eigenvalue_minus: complex


def eigen_basis(xi, formulation: str = "vorticity") -> EigenBasis:
    x1, x2, x3 = (float(v) for v in xi)
    kh2 = x1 * x1 + x2 * x2
    if kh2 == 0.0:
        raise DegenerateModeError(f"eigenbasis degenerate at xi = {tuple(xi)} (xi_h = 0)")
    kh = np.sqrt(kh2)
    k = np.sqrt(kh2 + x3 * x3)
    lam = 1j * kh / k
    if formulation == "vorticity":
        stationary = np.array([-x1 * x3, -x2 * x3, kh2, 0.0], dtype=complex)
        plus = np.array([-x2 * k, x1 * k, 0.0, kh], dtype=complex)
        minus = np.array([-x2 * k, x1 * k, 0.0, -kh], dtype=complex)
    elif formulation == "velocity":
        stationary = np.array([-x2, x1, 0.0, 0.0], dtype=complex)
        plus = np.array([x1 * x3, x2 * x3, -kh2, -1j * kh * k], dtype=complex)
        minus = np.array([x1 * x3, x2 * x3, -kh2, 1j * kh * k], dtype=complex)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    return EigenBasis(
        xi=(x1, x2, x3),
        formulation=formulation,
        stationary=stationary,
        plus=plus,
        minus=minus,
        eigenvalue_plus=lam,
        eigenvalue_minus=-lam,
    )


@dataclass
class ModeState:
    """Mode coefficients on the full lattice, plus the coupling strength."""

    grid: SpectralGrid
    sigma: float
    psi: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for arr in (self.psi, self.a, self.b):
            if arr.shape != self.grid.shape:
                raise ValueError("coefficient arrays must match the grid shape")

    def copy(self) -> "ModeState":
        return ModeState(self.grid, self.sigma, self.psi.copy(), self.a.copy(), self.b.copy())

    def dispersive_only(self) -> "ModeState":
        """Wave amplitudes only; stationary and frozen fiber channels zeroed."""
        a = self.a.copy()
        b = self.b.copy()
        a[0, 0, :] = 0.0
        b[0, 0, :] = 0.0
        return ModeState(self.grid, self.sigma, np.zeros_like(self.psi), a, b)

    def stationary_only(self) -> "ModeState":
        """Stream potential plus the frozen fiber channels; waves zeroed."""
        a = np.zeros_like(self.a)
        b = np.zeros_like(self.b)
        a[0, 0, :] = self.a[0, 0, :]
        b[0, 0, :] = self.b[0, 0, :]
        return ModeState(self.grid, self.sigma, self.psi.copy(), a, b)


def project_modes(field: SpectralField, sigma: float, check: bool = True) -> ModeState:
    """Decompose a divergence-free (w1, w2, w3, T) spectral field.

    Raises :class:`DivergenceError` if the vorticity part is not
    divergence free to relative tolerance 1e-8, or if the k = 0 mean of
    the third component is nonzero (not representable by any mode).
    """
    if field.rank != "vector4":
        raise ValueError("project_modes expects a vector4 field (w1, w2, w3, T)")
    g = field.grid
    w1, w2, w3, temp = field.coeffs
    if check:
        check_divergence_free(field)
        scale = max(float(np.max(np.abs(field.coeffs[:3]))), 1e-300)
        if abs(w3[0, 0, 0]) > 1e-8 * scale:
            raise DivergenceError(
                "nonzero mean of the third vorticity component is not representable"
            )

    psi = -w3 * g.inv_kh2

    # 1/(i |k| |k_h|^2) and 1/(i |k_h|), both zero at their degenerate slots
    apb = -1j * (g.kx * w2 - g.ky * w1) * g.inv_kh2 * np.sqrt(g.inv_k2)
    amb = -1j * temp * np.sqrt(g.inv_kh2)
    a = 0.5 * (apb + amb)
    b = 0.5 * (apb - amb)

    # frozen fiber channels (see module docstring)
    psi[0, 0, :] = w1[0, 0, :]
    a[0, 0, :] = w2[0, 0, :]
    b[0, 0, :] = temp[0, 0, :]
    return ModeState(g, float(sigma), psi, a, b)


def reconstruct_arrays(m: ModeState) -> np.ndarray:
    """(4, n1, n2, n3) spectral array (w1, w2, w3, T)."""
    g = m.grid
    apb = m.a + m.b
    out = np.empty((4,) + g.shape, dtype=np.complex128)
    out[0] = g.kx * g.kz * m.psi - 1j * g.ky * g.kmag * apb
    out[1] = g.ky * g.kz * m.psi + 1j * g.kx * g.kmag * apb
    out[2] = -g.kh2 * m.psi
    out[3] = 1j * g.khmag * (m.a - m.b)
    out[0][0, 0, :] = m.psi[0, 0, :]
    out[1][0, 0, :] = m.a[0, 0, :]
    out[2][0, 0, :] = 0.0
    out[3][0, 0, :] = m.b[0, 0, :]
    return out


def reconstruct_modes(m: ModeState) -> SpectralField:
    """Vorticity-form field (w1, w2, w3, T)."""
    return SpectralField(m.grid, reconstruct_arrays(m))


def reconstruct_velocity(m: ModeState) -> SpectralField:
    """Velocity-form field (u1, u2, u3, T) via Biot-Savart."""
    w = reconstruct_arrays(m)
    out = np.empty_like(w)
    out[:3] = velocity_from_vorticity_arrays(m.grid, w[:3])
    out[3] = w[3]
    return SpectralField(m.grid, out)


def free_propagate(m: ModeState, t: float) -> ModeState:
    """Exact linear flow over time t >= 0.

    ``psi`` is unchanged; ``a`` is multiplied by e^{+i sigma t |k_h|/|k|}
    and ``b`` by the conjugate phase.  The k_h = 0 fiber (phase 1) and
    the frozen channels stored there are untouched.
    """
    if t < 0:
        raise ValueError("free_propagate requires t >= 0")
    phase = np.exp(1j * (m.sigma * t) * m.grid.disp)
    return ModeState(m.grid, m.sigma, m.psi.copy(), m.a * phase, m.b * np.conj(phase))


def phase_factors(grid: SpectralGrid, sigma: float, t: float) -> np.ndarray:
    """Phase array for the ``a`` channel over (possibly negative) time t."""
    return np.exp(1j * (sigma * t) * grid.disp)
