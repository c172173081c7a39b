"""Stationary-mode limit dynamics: independent 2D flows on each z-slice.

The stream potential psi drives the horizontal velocity u = grad_h^perp
psi and the scalar vorticity wbar = Lap_h psi on every slice.  Slices
never couple: horizontal multipliers leave the z-transform alone and
the advection products are pointwise in physical z, so permuting slices
of the data permutes the trajectories exactly.

The self-interaction of the stationary family closes on psi:

    d/dt psi = -H,
    H = Lap_h^{-1}[ d1 psi * Lap_h d2 psi - d2 psi * Lap_h d1 psi ],

equivalently d/dt wbar + u.grad_h wbar = 0, plain 2D Euler in vorticity
form.  ``spectral_identity_check`` verifies the closed form against the
full three-dimensional route curl(S.grad S) projected onto the
stationary family.

Dealiasing here is horizontal-only: a two-thirds cut in (k1, k2) per
slice.  Truncating k3 as well would couple slices and break the exact
slice independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import BlowUpError, CflError
from .field import SpectralField
from .grid import SpectralGrid
from .modes import ModeState, project_modes, reconstruct_modes
from .norms import l2_norm
from .solver import BLOWUP_FACTOR, CFL_NUMBER, DT_CAP

__all__ = [
    "StreamState",
    "LimitRecord",
    "LimitResult",
    "stationary_self_interaction",
    "spectral_identity_check",
    "euler2d_step",
    "run_limit",
    "limit_initial_data",
    "limit_velocity",
]


@dataclass
class StreamState:
    """Stream potential on the full 3D lattice; k_h = 0 fiber gauged to zero."""

    grid: SpectralGrid
    psi_hat: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if self.psi_hat.shape != self.grid.shape:
            raise ValueError("psi_hat must match the grid shape")
        self.psi_hat = np.array(self.psi_hat, dtype=np.complex128)  # own it
        self.psi_hat[0, 0, :] = 0.0  # per-slice constants carry no flow

    def copy(self) -> "StreamState":
        return StreamState(self.grid, self.psi_hat.copy(), self.time)


def _mask_h(grid: SpectralGrid) -> np.ndarray:
    n1, n2, _ = grid.shape
    m1 = np.abs(np.fft.fftfreq(n1, 1.0 / n1).astype(int)) <= n1 // 3
    m2 = np.abs(np.fft.fftfreq(n2, 1.0 / n2).astype(int)) <= n2 // 3
    return m1[:, None, None] & m2[None, :, None]


def _bracket_hat(grid: SpectralGrid, psi_hat: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """F[d1 psi Lap_h d2 psi - d2 psi Lap_h d1 psi], dealiased horizontally."""
    d1 = 1j * grid.kx * psi_hat
    d2 = 1j * grid.ky * psi_hat
    spec = np.stack([d1, d2, -grid.kh2 * d1, -grid.kh2 * d2])
    p = sfft.ifftn(spec, axes=(1, 2, 3), norm="forward").real
    br = p[0] * p[3] - p[1] * p[2]
    return sfft.fftn(br, axes=(0, 1, 2), norm="forward") * mask


def stationary_self_interaction(state: StreamState, bracket_sign: float = 1.0) -> StreamState:
    """Tangent d/dt psi = -H.  bracket_sign is a mutation hook for tests."""
    g = state.grid
    br = bracket_sign * _bracket_hat(g, state.psi_hat, _mask_h(g))
    h_hat = -g.inv_kh2 * br  # Lap_h^{-1} is -1/|k_h|^2
    return StreamState(g, -h_hat, state.time)


def spectral_identity_check(state: StreamState, bracket_sign: float = 1.0) -> float:
    """L2 residual between two routes to the stationary self-interaction.

    Route one: S = (-d2 psi, d1 psi, 0), the full curl(S.grad S)
    assembled spectrally and projected onto the stationary family.
    Route two: the closed form s_H with H from the bracket (scaled by
    bracket_sign so tests can knock it over on purpose).

    Exact agreement needs alias-free products; use data band-limited to
    a third of the dealias cut (|k| <= n/6).
    """
    g = state.grid
    psi = state.psi_hat
    s1_hat = -1j * g.ky * psi
    s2_hat = 1j * g.kx * psi
    spec = np.stack(
        [
            s1_hat,
            s2_hat,
            1j * g.kx * s1_hat,
            1j * g.ky * s1_hat,
            1j * g.kx * s2_hat,
            1j * g.ky * s2_hat,
        ]
    )
    p = sfft.ifftn(spec, axes=(1, 2, 3), norm="forward").real
    f1 = p[0] * p[2] + p[1] * p[3]
    f2 = p[0] * p[4] + p[1] * p[5]
    fh = sfft.fftn(np.stack([f1, f2]), axes=(1, 2, 3), norm="forward")

    curl = np.empty((4,) + g.shape, dtype=np.complex128)
    curl[0] = -1j * g.kz * fh[1]
    curl[1] = 1j * g.kz * fh[0]
    curl[2] = 1j * (g.kx * fh[1] - g.ky * fh[0])
    curl[3] = 0.0
    route_a = project_modes(SpectralField(g, curl), sigma=0.0, check=False).stationary_only()

    h_hat = -g.inv_kh2 * (bracket_sign * _bracket_hat(g, psi, _mask_h(g)))
    route_b = ModeState(g, 0.0, h_hat, np.zeros_like(h_hat), np.zeros_like(h_hat))

    diff = reconstruct_modes(route_a).coeffs - reconstruct_modes(route_b).coeffs
    return l2_norm(SpectralField(g, diff))


def limit_velocity(state: StreamState) -> SpectralField:
    """Horizontal velocity (u1, u2, 0) generated by the stream potential."""
    g = state.grid
    u = np.stack(
        [
            -1j * g.ky * state.psi_hat,
            1j * g.kx * state.psi_hat,
            np.zeros_like(state.psi_hat),
        ]
    )
    return SpectralField(g, u)


def limit_initial_data(field: SpectralField) -> StreamState:
    """Stream potential of the stationary part of a velocity-form (u, T) field."""
    if field.rank != "vector4":
        raise ValueError("limit_initial_data expects a vector4 (u, T) field")
    g = field.grid
    u1, u2 = field.coeffs[0], field.coeffs[1]
    psi = -1j * (g.kx * u2 - g.ky * u1) * g.inv_kh2
    return StreamState(g, psi, 0.0)


class _LimitWorkspace:
    def __init__(self, grid: SpectralGrid):
        self.grid = grid
        self.mask = _mask_h(grid)

    def rhs(self, w_hat: np.ndarray):
        """Tangent of wbar_hat = -F[u.grad_h wbar]; also max speed."""
        g = self.grid
        psi = -w_hat * g.inv_kh2
        spec = np.stack(
            [-1j * g.ky * psi, 1j * g.kx * psi, 1j * g.kx * w_hat, 1j * g.ky * w_hat]
        )
        p = sfft.ifftn(spec, axes=(1, 2, 3), norm="forward").real
        umax = float(np.sqrt(np.max(p[0] * p[0] + p[1] * p[1])))
        adv = p[0] * p[2] + p[1] * p[3]
        return -sfft.fftn(adv, axes=(0, 1, 2), norm="forward") * self.mask, umax


def euler2d_step(state: StreamState, dt: float, workspace: _LimitWorkspace | None = None) -> StreamState:
    """Classical RK4 on the per-slice vorticity."""
    if dt <= 0:
        raise ValueError("step needs dt > 0")
    ws = workspace or _LimitWorkspace(state.grid)
    g = state.grid
    w = -g.kh2 * state.psi_hat
    k1, umax = ws.rhs(w)
    if not np.isfinite(umax):
        raise BlowUpError(f"nonfinite velocity at t={state.time:.6g}", time=state.time)
    if umax > 0 and dt > CFL_NUMBER * g.min_spacing / umax:
        raise CflError(
            f"dt={dt:g} violates the advective step bound {CFL_NUMBER * g.min_spacing / umax:g}"
        )
    k2, _ = ws.rhs(w + 0.5 * dt * k1)
    k3, _ = ws.rhs(w + 0.5 * dt * k2)
    k4, _ = ws.rhs(w + dt * k3)
    w = w + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return StreamState(g, -w * g.inv_kh2, state.time + dt)


@dataclass(frozen=True)
class LimitRecord:
    t: float
    energy: float     # |u|_{L2}^2 summed over slices
    enstrophy: float  # |wbar|_{L2}^2 summed over slices
    grad_inf: float   # max |grad_h u| on the grid


@dataclass(frozen=True)
class LimitResult:
    status: str
    records: tuple[LimitRecord, ...]
    final_state: StreamState
    message: str = ""


def _limit_record(state: StreamState) -> LimitRecord:
    g = state.grid
    e = float(g.volume * np.sum(g.kh2 * np.abs(state.psi_hat) ** 2))
    z = float(g.volume * np.sum(g.kh2**2 * np.abs(state.psi_hat) ** 2))
    u = limit_velocity(state).coeffs[:2]
    grads = np.stack([1j * g.kx * u[0], 1j * g.ky * u[0], 1j * g.kx * u[1], 1j * g.ky * u[1]])
    ginf = float(np.max(np.abs(sfft.ifftn(grads, axes=(1, 2, 3), norm="forward").real)))
    return LimitRecord(state.time, e, z, ginf)


def run_limit(
    state0: StreamState,
    t_end: float,
    dt: float | str = "auto",
    output_every: int = 1,
    on_sample=None,
) -> LimitResult:
    """Advance the slicewise flow to t_end with diagnostics sampling."""
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    ws = _LimitWorkspace(state0.grid)
    state = state0.copy()
    rec0 = _limit_record(state)
    records = [rec0]
    if on_sample is not None:
        on_sample(state.time, state)
    if t_end == 0:
        return LimitResult("ok", tuple(records), state)

    if dt == "auto":
        _, umax0 = ws.rhs(-state.grid.kh2 * state.psi_hat)
        h = DT_CAP if umax0 == 0 else min(CFL_NUMBER * state.grid.min_spacing / umax0, DT_CAP)
        nsteps = max(1, math.ceil(t_end / h - 1e-12))
        h = t_end / nsteps
    else:
        h = float(dt)
        nsteps = max(1, int(round(t_end / h)))
        if abs(nsteps * h - t_end) > 1e-9 * max(1.0, t_end):
            nsteps = max(1, math.ceil(t_end / h - 1e-12))

    base_time = state.time
    status, message = "ok", ""
    for j in range(1, nsteps + 1):
        step_dt = h if j < nsteps else (base_time + t_end) - state.time
        try:
            state = euler2d_step(state, step_dt, ws)
        except (BlowUpError, CflError) as e:
            status, message = "blowup", str(e)
            break
        if j % output_every == 0 or j == nsteps:
            rec = _limit_record(state)
            records.append(rec)
            if on_sample is not None:
                on_sample(state.time, state)
            if not np.isfinite(rec.energy):
                status, message = "blowup", f"nonfinite energy at t={state.time:.6g}"
                break
            if rec0.grad_inf > 0 and rec.grad_inf > BLOWUP_FACTOR * rec0.grad_inf:
                status, message = (
                    "blowup",
                    f"velocity gradient grew {rec.grad_inf / rec0.grad_inf:.3g}x at t={state.time:.6g}",
                )
                break
    return LimitResult(status, tuple(records), state, message)
