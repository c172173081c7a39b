"""Time integration of the nonlinear buoyancy-coupled flow in mode coordinates.

State is a :class:`~bqsim.modes.ModeState`.  The skew linear coupling is
diagonal there with purely imaginary symbol, so a Lawson integrating
factor handles it exactly and the explicit Runge-Kutta stability limit
is set by advection alone, uniformly in sigma.

The nonlinearity is evaluated pseudo-spectrally in rotational form,

    d/dt omega |_NL = curl(u x omega),      d/dt T |_NL = -div(u T),

equal to (omega.grad u - u.grad omega, -u.grad T) for divergence-free
fields, and preferable discretely: the curl keeps the vorticity tangent
exactly divergence free and the flux form conserves the T mean to
machine precision.  Products are formed on the collocation grid and the
result is truncated to the two-thirds band, so each quadratic term is
an exact convolution of the retained modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import fft as sfft

from .errors import BlowUpError, CflError, ConfigError
from .field import SpectralField, _mirror_conj, divergence_residual
from .grid import SpectralGrid, make_grid
from .modes import ModeState, free_propagate, project_modes, reconstruct_arrays, reconstruct_modes, reconstruct_velocity
from .norms import grad_linf_norm, hk_norms, l2_norm, linf_norm
from .operators import curl, velocity_from_vorticity_arrays

__all__ = [
    "InitSpec",
    "SimConfig",
    "DiagnosticsRecord",
    "RunResult",
    "GrowthReport",
    "initial_field",
    "initial_state",
    "nonlinear_rhs",
    "step",
    "run",
    "compute_diagnostics",
    "energy_and_growth_check",
]

_RECIPES = ("random_band", "stationary_band", "mode_list")

CFL_NUMBER = 0.5
DT_CAP = 0.1
BLOWUP_FACTOR = 1e3


@dataclass(frozen=True)
class InitSpec:
    """Initial-data generator parameters.

    recipe "random_band": divergence-free random velocity (curl of a
    random band-limited potential) plus an independent random scalar.
    recipe "stationary_band": velocity from a random band-limited stream
    function, horizontal and z-dependent, with T = 0; the state starts
    with no dispersive content, so waves appear only through the
    nonlinear coupling.
    recipe "mode_list": explicit mode coefficients, entries
    (xi, channel, (re, im)) with channel one of psi/a/b; the Hermitian
    partner at -xi is filled in automatically.

    amplitude rescales the generated fields so the pointwise maximum
    speed equals it (mode_list: plain multiplier).  band is the closed
    range of Euclidean wavenumber magnitudes kept.
    """

    recipe: str = "random_band"
    amplitude: float = 0.05
    seed: int = 0
    band: tuple[float, float] = (1.0, 4.0)
    modes: tuple = ()

    def __post_init__(self):
        if self.recipe not in _RECIPES:
            raise ConfigError("initial_data.recipe", f"unknown recipe {self.recipe!r}")
        if self.amplitude <= 0:
            raise ConfigError("initial_data.amplitude", "must be positive")
        lo, hi = self.band
        if not (0 < lo <= hi):
            raise ConfigError("initial_data.band", f"need 0 < lo <= hi, got {self.band}")
        if self.recipe == "mode_list" and not self.modes:
            raise ConfigError("initial_data.modes", "mode_list recipe needs at least one mode")


@dataclass(frozen=True)
class SimConfig:
    n: int | tuple[int, int, int]
    sigma: float
    t_end: float
    dt: float | str = "auto"
    box_length: float = 2.0 * np.pi
    initial_data: InitSpec = dc_field(default_factory=InitSpec)
    output_every: int = 1
    dealias: bool = True

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError("sigma", "must be nonnegative")
        if self.t_end < 0:
            raise ConfigError("t_end", "must be nonnegative")
        if self.dt != "auto":
            if not isinstance(self.dt, (int, float)) or self.dt <= 0:
                raise ConfigError("dt", 'must be positive or "auto"')
        if not isinstance(self.output_every, int) or self.output_every < 1:
            raise ConfigError("output_every", "must be a positive integer")
        if self.box_length <= 0:
            raise ConfigError("box_length", "must be positive")

    def make_grid(self) -> SpectralGrid:
        n = self.n
        if isinstance(n, int):
            n = (n, n, n)
        try:
            return make_grid(*n, box_length=self.box_length)
        except ValueError as e:
            raise ConfigError("n", str(e)) from e


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float            # |u|_{L2}^2 + |T|_{L2}^2
    hk_norms: dict[int, float]
    disp_w1inf: float        # W^{1,inf} of the reconstructed wave part (velocity form)
    stat_l2: float           # L2 of the reconstructed stationary part (velocity form)
    div_residual: float      # relative divergence residual of the vorticity
    grad_u_inf: float        # |grad u|_inf, drives the blow-up guard
    grad_t_inf: float        # |grad T|_inf


@dataclass(frozen=True)
class RunResult:
    status: str              # "ok" | "blowup"
    records: tuple[DiagnosticsRecord, ...]
    final_state: ModeState
    final_time: float
    message: str = ""


def _band_mask(grid: SpectralGrid, band: tuple[float, float]) -> np.ndarray:
    # band is in units of the first axis fundamental wavenumber
    scale = 2.0 * np.pi / grid.lengths[0]
    lo, hi = band
    kmag = grid.kmag
    return (kmag >= lo * scale - 1e-12) & (kmag <= hi * scale + 1e-12) & grid.dealias_mask


def _hermitian_random(rng, grid: SpectralGrid, shape_lead: tuple) -> np.ndarray:
    z = rng.standard_normal(shape_lead + grid.shape) + 1j * rng.standard_normal(shape_lead + grid.shape)
    return 0.5 * (z + _mirror_conj(z))


def _scale_to_amplitude(grid: SpectralGrid, coeffs: np.ndarray, amplitude: float) -> np.ndarray:
    phys = sfft.ifftn(coeffs, axes=(-3, -2, -1), norm="forward").real
    if phys.ndim == 4:
        peak = float(np.sqrt(np.max(np.sum(phys * phys, axis=0))))
    else:
        peak = float(np.max(np.abs(phys)))
    if peak == 0.0:
        return coeffs
    return coeffs * (amplitude / peak)


def initial_field(grid: SpectralGrid, spec: InitSpec) -> SpectralField:
    """Real, divergence-free, mean-free (u, T) in the requested band."""
    if spec.recipe == "mode_list":
        return reconstruct_velocity(_mode_list_state(grid, spec, sigma=0.0))
    rng = np.random.default_rng(spec.seed)
    mask = _band_mask(grid, spec.band)
    out = np.zeros((4,) + grid.shape, dtype=np.complex128)
    if spec.recipe == "random_band":
        pot = _hermitian_random(rng, grid, (3,)) * mask
        u = 1j * np.stack(
            [
                grid.ky * pot[2] - grid.kz * pot[1],
                grid.kz * pot[0] - grid.kx * pot[2],
                grid.kx * pot[1] - grid.ky * pot[0],
            ]
        )
        temp = _hermitian_random(rng, grid, ()) * mask
        out[:3] = _scale_to_amplitude(grid, u, spec.amplitude)
        out[3] = _scale_to_amplitude(grid, temp, spec.amplitude)
    else:  # stationary_band
        psi = _hermitian_random(rng, grid, ()) * mask
        u = np.stack([-1j * grid.ky * psi, 1j * grid.kx * psi, np.zeros_like(psi)])
        out[:3] = _scale_to_amplitude(grid, u, spec.amplitude)
    return SpectralField(grid, out)


def _mode_list_state(grid: SpectralGrid, spec: InitSpec, sigma: float) -> ModeState:
    chans = {
        "psi": np.zeros(grid.shape, dtype=np.complex128),
        "a": np.zeros(grid.shape, dtype=np.complex128),
        "b": np.zeros(grid.shape, dtype=np.complex128),
    }
    partner = {"psi": "psi", "a": "b", "b": "a"}
    for entry in spec.modes:
        xi, channel, value = entry
        if channel not in chans:
            raise ConfigError("initial_data.modes", f"unknown channel {channel!r}")
        v = spec.amplitude * complex(value[0], value[1])
        idx = tuple(int(c) % n for c, n in zip(xi, grid.shape))
        midx = tuple((-int(c)) % n for c, n in zip(xi, grid.shape))
        chans[channel][idx] += v
        if not (midx == idx and partner[channel] == channel):
            chans[partner[channel]][midx] += np.conj(v)
        # self-conjugate psi modes fold onto themselves; keep them real
        elif v.imag == 0.0:
            pass
        else:
            raise ConfigError("initial_data.modes", f"self-conjugate mode {tuple(xi)} must be real")
    return ModeState(grid, sigma, chans["psi"], chans["a"], chans["b"])


def initial_state(grid: SpectralGrid, spec: InitSpec, sigma: float) -> ModeState:
    if spec.recipe == "mode_list":
        return _mode_list_state(grid, spec, sigma)
    uT = initial_field(grid, spec)
    w = curl(SpectralField(grid, uT.coeffs[:3]))
    wT = np.concatenate([w.coeffs, uT.coeffs[3:4]], axis=0)
    m = project_modes(SpectralField(grid, wT), sigma)
    if spec.recipe == "stationary_band":
        # waves are zero by construction; drop the projection roundoff
        m.a.fill(0.0)
        m.b.fill(0.0)
    return m


class _Workspace:
    """Per-run scratch: projection multipliers, dealias mask, phase cache."""

    def __init__(self, grid: SpectralGrid, sigma: float, dealias: bool = True):
        self.grid = grid
        self.sigma = float(sigma)
        self.mask = grid.dealias_mask if dealias else None
        self.inv_k_kh2 = grid.inv_kh2 * np.sqrt(grid.inv_k2)
        self.inv_khmag = np.sqrt(grid.inv_kh2)
        self._phases: dict[float, tuple] = {}

    def phases(self, dt: float):
        got = self._phases.get(dt)
        if got is None:
            e1 = np.exp(1j * (self.sigma * 0.5 * dt) * self.grid.disp)
            e2 = e1 * e1
            got = (e1, np.conj(e1), e2, np.conj(e2))
            self._phases[dt] = got
        return got

    def rhs(self, psi: np.ndarray, a: np.ndarray, b: np.ndarray):
        """Nonlinear tangent of (psi, a, b); also returns max speed for the CFL check."""
        g = self.grid
        m = ModeState(g, self.sigma, psi, a, b)
        what = reconstruct_arrays(m)
        spec7 = np.concatenate([velocity_from_vorticity_arrays(g, what[:3]), what], axis=0)
        phys = sfft.ifftn(spec7, axes=(1, 2, 3), norm="forward").real
        u, w, temp = phys[0:3], phys[3:6], phys[6]
        umax = float(np.sqrt(np.max(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])))

        prod = np.empty_like(phys[:6])
        prod[0] = u[1] * w[2] - u[2] * w[1]
        prod[1] = u[2] * w[0] - u[0] * w[2]
        prod[2] = u[0] * w[1] - u[1] * w[0]
        prod[3] = u[0] * temp
        prod[4] = u[1] * temp
        prod[5] = u[2] * temp
        ph = sfft.fftn(prod, axes=(1, 2, 3), norm="forward")

        tw1 = 1j * (g.ky * ph[2] - g.kz * ph[1])
        tw2 = 1j * (g.kz * ph[0] - g.kx * ph[2])
        tw3 = 1j * (g.kx * ph[1] - g.ky * ph[0])
        tt = -1j * (g.kx * ph[3] + g.ky * ph[4] + g.kz * ph[5])
        if self.mask is not None:
            tw1 *= self.mask
            tw2 *= self.mask
            tw3 *= self.mask
            tt *= self.mask

        tpsi = -tw3 * g.inv_kh2
        tapb = -1j * (g.kx * tw2 - g.ky * tw1) * self.inv_k_kh2
        tamb = -1j * tt * self.inv_khmag
        ta = 0.5 * (tapb + tamb)
        tb = 0.5 * (tapb - tamb)
        tpsi[0, 0, :] = tw1[0, 0, :]
        ta[0, 0, :] = tw2[0, 0, :]
        tb[0, 0, :] = tt[0, 0, :]
        return (tpsi, ta, tb), umax


def nonlinear_rhs(m: ModeState, dealias: bool = True) -> ModeState:
    """Tangent of the nonlinear terms alone, as mode coefficients."""
    ws = _Workspace(m.grid, m.sigma, dealias)
    (tpsi, ta, tb), umax = ws.rhs(m.psi, m.a, m.b)
    if not np.isfinite(umax):
        raise BlowUpError("nonfinite velocity in nonlinear evaluation", time=math.nan)
    return ModeState(m.grid, m.sigma, tpsi, ta, tb)


def _lawson_step(m: ModeState, dt: float, ws: _Workspace, t: float) -> ModeState:
    (k1p, k1a, k1b), umax = ws.rhs(m.psi, m.a, m.b)
    if not np.isfinite(umax):
        raise BlowUpError(f"nonfinite velocity at t={t:.6g}", time=t)
    h = m.grid.min_spacing
    if umax > 0 and dt > CFL_NUMBER * h / umax:
        raise CflError(
            f"dt={dt:g} violates the advective step bound {CFL_NUMBER * h / umax:g} "
            f"(max speed {umax:g})"
        )
    e1, e1c, e2, e2c = ws.phases(dt)

    half = 0.5 * dt
    (k2p, k2a, k2b), _ = ws.rhs(m.psi + half * k1p, e1 * (m.a + half * k1a), e1c * (m.b + half * k1b))
    (k3p, k3a, k3b), _ = ws.rhs(m.psi + half * k2p, e1 * m.a + half * k2a, e1c * m.b + half * k2b)
    (k4p, k4a, k4b), _ = ws.rhs(
        m.psi + dt * k3p, e2 * m.a + dt * e1 * k3a, e2c * m.b + dt * e1c * k3b
    )

    sixth = dt / 6.0
    psi = m.psi + sixth * (k1p + 2.0 * (k2p + k3p) + k4p)
    a = e2 * m.a + sixth * (e2 * k1a + 2.0 * e1 * (k2a + k3a) + k4a)
    b = e2c * m.b + sixth * (e2c * k1b + 2.0 * e1c * (k2b + k3b) + k4b)
    return ModeState(m.grid, m.sigma, psi, a, b)


def step(
    m: ModeState,
    dt: float,
    workspace: _Workspace | None = None,
    nonlinearity: bool = True,
    t: float = 0.0,
) -> ModeState:
    """One Runge-Kutta step in integrating-factor variables.

    With the nonlinearity disabled the step reduces to free_propagate
    exactly, whatever dt: the linear phase is applied in closed form.
    """
    if dt <= 0:
        raise ValueError("step needs dt > 0")
    if not nonlinearity:
        return free_propagate(m, dt)
    if workspace is None:
        workspace = _Workspace(m.grid, m.sigma)
    return _lawson_step(m, dt, workspace, t)


def _split_uT(field: SpectralField):
    g = field.grid
    return SpectralField(g, field.coeffs[:3]), SpectralField(g, field.coeffs[3])


def compute_diagnostics(m: ModeState, t: float) -> DiagnosticsRecord:
    full = reconstruct_velocity(m)
    g = m.grid
    energy = float(g.volume * np.sum(np.abs(full.coeffs) ** 2))
    hk = hk_norms(full, (1, 2, 3))

    disp = reconstruct_velocity(m.dispersive_only())
    disp_w1inf = linf_norm(disp) + grad_linf_norm(disp)
    stat_l2 = l2_norm(reconstruct_velocity(m.stationary_only()))

    vort = reconstruct_modes(m)
    div_res = divergence_residual(SpectralField(g, vort.coeffs[:3]))

    uf, tf = _split_uT(full)
    return DiagnosticsRecord(
        t=t,
        energy=energy,
        hk_norms=hk,
        disp_w1inf=disp_w1inf,
        stat_l2=stat_l2,
        div_residual=div_res,
        grad_u_inf=grad_linf_norm(uf),
        grad_t_inf=grad_linf_norm(tf),
    )


def run(config: SimConfig, on_sample=None) -> RunResult:
    """Integrate to t_end, sampling diagnostics every output_every steps.

    Aborts with status "blowup" (partial records kept) when values go
    nonfinite or the velocity gradient exceeds BLOWUP_FACTOR times its
    initial size.  Bitwise deterministic for a fixed config.
    """
    grid = config.make_grid()
    m = initial_state(grid, config.initial_data, config.sigma)
    ws = _Workspace(grid, config.sigma, config.dealias)

    rec0 = compute_diagnostics(m, 0.0)
    records = [rec0]
    if on_sample is not None:
        on_sample(0.0, m)

    if config.t_end == 0:
        return RunResult("ok", tuple(records), m, 0.0)

    _, umax0 = ws.rhs(m.psi, m.a, m.b)
    if config.dt == "auto":
        # 0.8 margin below the initial CFL bound so moderate speed growth
        # does not trip the hard per-step check mid-run
        dt = DT_CAP if umax0 == 0 else min(0.8 * CFL_NUMBER * grid.min_spacing / umax0, DT_CAP)
        nsteps = max(1, math.ceil(config.t_end / dt - 1e-12))
        dt = config.t_end / nsteps
        dt_last = dt
    else:
        dt = float(config.dt)
        ratio = config.t_end / dt
        nsteps = max(1, int(round(ratio)))
        if abs(nsteps - ratio) < 1e-9:
            dt_last = dt
        else:
            nsteps = max(1, math.ceil(ratio - 1e-12))
            dt_last = config.t_end - (nsteps - 1) * dt

    grad_guard = rec0.grad_u_inf
    status, message = "ok", ""
    t = 0.0
    for j in range(1, nsteps + 1):
        h = dt if j < nsteps else dt_last
        try:
            m = _lawson_step(m, h, ws, t)
        except (BlowUpError, CflError) as e:
            status, message = "blowup", str(e)
            break
        t = j * dt if j < nsteps else config.t_end
        if j % config.output_every == 0 or j == nsteps:
            rec = compute_diagnostics(m, t)
            records.append(rec)
            if on_sample is not None:
                on_sample(t, m)
            if not np.isfinite(rec.energy):
                status, message = "blowup", f"nonfinite energy at t={t:.6g}"
                break
            if grad_guard > 0 and rec.grad_u_inf > BLOWUP_FACTOR * grad_guard:
                status, message = (
                    "blowup",
                    f"velocity gradient grew {rec.grad_u_inf / grad_guard:.3g}x at t={t:.6g}",
                )
                break
    return RunResult(status, tuple(records), m, t, message)


@dataclass(frozen=True)
class GrowthReport:
    energy_initial: float
    energy_drift: float                  # max_t |E(t)-E(0)|/E(0)
    fitted_growth_constant: float        # smallest C making the growth bound hold
    max_hk_ratio: dict[int, float]       # max_t Hk(t)/Hk(0)


def energy_and_growth_check(records) -> GrowthReport:
    """Energy constancy plus the fitted Sobolev growth constant.

    The growth bound checked is Hk(t) <= Hk(0) * exp(C * G(t)) with
    G(t) the time integral of |grad u|_inf + |grad T|_inf; the report
    carries the smallest C that makes it hold across the trajectory,
    and the observed energy drift.
    """
    records = list(records)
    if not records:
        raise ValueError("empty trajectory")
    e0 = records[0].energy
    drift = max(abs(r.energy - e0) for r in records)
    drift = drift / e0 if e0 > 0 else drift

    ts = np.array([r.t for r in records])
    g = np.array([r.grad_u_inf + r.grad_t_inf for r in records])
    G = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]) * np.diff(ts))])

    orders = sorted(records[0].hk_norms)
    ratios = {k: 0.0 for k in orders}
    c_fit = 0.0
    for k in orders:
        h0 = records[0].hk_norms[k]
        for r, Gt in zip(records, G):
            hk = r.hk_norms[k]
            ratio = hk / h0 if h0 > 0 else (math.inf if hk > 0 else 0.0)
            ratios[k] = max(ratios[k], ratio)
            if ratio > 1.0:
                c_fit = max(c_fit, math.inf if Gt == 0 else math.log(ratio) / Gt)
    return GrowthReport(
        energy_initial=e0,
        energy_drift=float(drift),
        fitted_growth_constant=float(c_fit),
        max_hk_ratio=ratios,
    )
