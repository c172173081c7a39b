"""Nonlinear solver: initial data, tangent oracle, stepping, conservation."""

import numpy as np
import pytest

from bqsim.errors import CflError, ConfigError
from bqsim.field import SpectralField, divergence_residual, hermitian_residual
from bqsim.modes import ModeState, free_propagate, reconstruct_velocity
from bqsim.norms import l2_norm
from bqsim.solver import (
    InitSpec,
    SimConfig,
    compute_diagnostics,
    energy_and_growth_check,
    initial_field,
    initial_state,
    nonlinear_rhs,
    run,
    step,
)

from conftest import random_vector4


def _zero_state(grid, sigma=1.0):
    z = np.zeros(grid.shape, complex)
    return ModeState(grid, sigma, z.copy(), z.copy(), z.copy())


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(n=32, sigma=-1.0, t_end=1.0)
    with pytest.raises(ConfigError):
        SimConfig(n=32, sigma=1.0, t_end=-0.5)
    with pytest.raises(ConfigError):
        SimConfig(n=32, sigma=1.0, t_end=1.0, dt=0.0)
    with pytest.raises(ConfigError):
        SimConfig(n=32, sigma=1.0, t_end=1.0, dt="fast")
    with pytest.raises(ConfigError):
        SimConfig(n=32, sigma=1.0, t_end=1.0, output_every=0)
    with pytest.raises(ConfigError):
        InitSpec(recipe="vortex_soup")
    with pytest.raises(ConfigError):
        InitSpec(amplitude=-0.1)
    with pytest.raises(ConfigError):
        InitSpec(band=(4.0, 1.0))
    # boundary values the acceptance battery needs
    SimConfig(n=32, sigma=0.0, t_end=0.0)


def test_initial_field_invariants(grid32):
    for recipe in ("random_band", "stationary_band"):
        spec = InitSpec(recipe=recipe, amplitude=0.07, seed=5, band=(1.0, 4.0))
        f = initial_field(grid32, spec)
        assert f.rank == "vector4"
        assert hermitian_residual(f) < 1e-13
        assert divergence_residual(f) < 1e-13
        # mean-free and band-limited
        assert np.all(np.abs(f.coeffs[:, 0, 0, 0]) == 0.0)
        outside = grid32.kmag > 4.0 + 1e-9
        assert np.max(np.abs(f.coeffs[:, outside])) == 0.0
        # peak speed matches the requested amplitude
        phys = np.fft.ifftn(f.coeffs[:3], axes=(1, 2, 3), norm="forward").real
        speed = np.sqrt(np.sum(phys**2, axis=0))
        assert np.max(speed) == pytest.approx(0.07, rel=1e-10)


def test_initial_field_determinism(grid32):
    spec = InitSpec(recipe="random_band", amplitude=0.05, seed=9)
    a = initial_field(grid32, spec)
    b = initial_field(grid32, spec)
    assert np.array_equal(a.coeffs, b.coeffs)
    c = initial_field(grid32, InitSpec(recipe="random_band", amplitude=0.05, seed=10))
    assert not np.array_equal(a.coeffs, c.coeffs)


def test_stationary_band_has_no_waves(grid32):
    spec = InitSpec(recipe="stationary_band", amplitude=0.05, seed=2)
    m = initial_state(grid32, spec, sigma=50.0)
    assert np.max(np.abs(m.a)) == 0.0
    assert np.max(np.abs(m.b)) == 0.0
    assert np.max(np.abs(m.psi)) > 0.0


def test_mode_list_recipe(grid32):
    # listed coefficients are scaled by the amplitude knob; use 1 here
    spec = InitSpec(
        recipe="mode_list",
        amplitude=1.0,
        modes=(((1, 0, 0), "a", (0.0, -1.0)),),
    )
    m = initial_state(grid32, spec, sigma=1.0)
    assert m.a[1, 0, 0] == pytest.approx(-1j)
    # Hermitian partner lands in the b channel at -xi
    assert m.b[-1, 0, 0] == pytest.approx(np.conj(-1j))
    rec = reconstruct_velocity(m)
    assert hermitian_residual(rec) < 1e-14

    with pytest.raises(ConfigError):
        # (16,0,0) is its own Hermitian partner on a 32-grid: psi must be real
        initial_state(
            grid32,
            InitSpec(recipe="mode_list", modes=(((16, 0, 0), "psi", (0.0, 1.0)),)),
            sigma=1.0,
        )


def test_nonlinear_rhs_stationary_oracle(grid32):
    """psi = sin x1 + sin 2 x2 drives d/dt psi = -(6/5) cos x1 cos 2x2.

    Closed form: H = lap_h^{-1}(d1 psi lap_h d2 psi - d2 psi lap_h d1 psi)
    = lap_h^{-1}(-6 cos x1 cos 2x2); the tangent is -H.
    """
    m = _zero_state(grid32, sigma=0.0)
    m.psi[1, 0, 0] = -0.5j
    m.psi[-1, 0, 0] = 0.5j
    m.psi[0, 2, 0] = -0.5j
    m.psi[0, -2, 0] = 0.5j
    tang = nonlinear_rhs(m)
    x = grid32.collocation_axis(1)
    y = grid32.collocation_axis(2)
    X, Y = np.meshgrid(x, y, indexing="ij")
    expected = -(6.0 / 5.0) * np.cos(X) * np.cos(2 * Y)
    got = np.fft.ifftn(tang.psi, norm="forward").real[:, :, 0]
    assert np.max(np.abs(got - expected)) < 1e-12
    assert np.max(np.abs(tang.a)) < 1e-14
    assert np.max(np.abs(tang.b)) < 1e-14


def test_nonlinear_rhs_eigenfunction_is_stationary(grid32):
    # sin x1 sin x2 is a lap_h eigenfunction: the self-interaction vanishes
    m = _zero_state(grid32)
    m.psi[1, 1, 0] = -0.25
    m.psi[-1, 1, 0] = 0.25
    m.psi[1, -1, 0] = 0.25
    m.psi[-1, -1, 0] = -0.25
    tang = nonlinear_rhs(m)
    for c in (tang.psi, tang.a, tang.b):
        assert np.max(np.abs(c)) < 1e-14


def test_step_without_nonlinearity_is_free_flow(grid32):
    rng = np.random.default_rng(30)
    m = initial_state(grid32, InitSpec(recipe="random_band", seed=1), sigma=6.0)
    s = step(m, 0.02, nonlinearity=False)
    f = free_propagate(m, 0.02)
    for x, y in ((s.psi, f.psi), (s.a, f.a), (s.b, f.b)):
        assert np.array_equal(x, y)


def test_full_step_on_eigenfunction_reduces_to_free_flow(grid32):
    """All four stage nonlinearities vanish identically for a z-independent
    lap_h-eigenfunction stream state, so the Lawson update must coincide
    with pure phase flow."""
    m = _zero_state(grid32, sigma=3.0)
    m.psi[1, 1, 0] = -0.25
    m.psi[-1, 1, 0] = 0.25
    m.psi[1, -1, 0] = 0.25
    m.psi[-1, -1, 0] = -0.25
    s = step(m, 0.05)
    f = free_propagate(m, 0.05)
    for x, y in ((s.psi, f.psi), (s.a, f.a), (s.b, f.b)):
        assert np.max(np.abs(x - y)) < 1e-15


def test_step_preserves_reality_and_divergence(grid32):
    m = initial_state(grid32, InitSpec(recipe="random_band", amplitude=0.1, seed=4), sigma=8.0)
    for _ in range(5):
        m = step(m, 0.01)
    from bqsim.modes import reconstruct_modes

    full = reconstruct_modes(m)
    assert hermitian_residual(full) < 1e-11
    assert divergence_residual(SpectralField(grid32, full.coeffs[:3])) < 1e-10


def test_cfl_violation_raises(grid32):
    m = initial_state(grid32, InitSpec(recipe="random_band", amplitude=1.0, seed=4), sigma=1.0)
    with pytest.raises(CflError):
        step(m, 5.0)


def test_run_emits_every_step_and_lands_exactly():
    cfg = SimConfig(
        n=16,
        sigma=5.0,
        t_end=0.05,
        dt=1e-2,
        initial_data=InitSpec(recipe="random_band", amplitude=0.05, seed=7),
    )
    res = run(cfg)
    assert res.status == "ok"
    ts = [r.t for r in res.records]
    assert ts == pytest.approx([0.0, 0.01, 0.02, 0.03, 0.04, 0.05])
    assert res.final_time == 0.05


def test_run_zero_horizon_single_record():
    cfg = SimConfig(n=16, sigma=1.0, t_end=0.0)
    res = run(cfg)
    assert res.status == "ok"
    assert len(res.records) == 1
    assert res.records[0].t == 0.0


def test_run_output_thinning():
    cfg = SimConfig(
        n=16,
        sigma=1.0,
        t_end=0.1,
        dt=1e-2,
        output_every=4,
        initial_data=InitSpec(amplitude=0.05, seed=7),
    )
    res = run(cfg)
    ts = [r.t for r in res.records]
    # t=0, every 4th step, and the final time regardless of phase
    assert ts == pytest.approx([0.0, 0.04, 0.08, 0.1])


def test_run_determinism():
    cfg = SimConfig(
        n=16,
        sigma=3.0,
        t_end=0.05,
        dt=1e-2,
        initial_data=InitSpec(recipe="random_band", amplitude=0.08, seed=11),
    )
    r1 = run(cfg)
    r2 = run(cfg)
    for a, b in zip(r1.records, r2.records):
        assert a == b
    assert np.array_equal(r1.final_state.psi, r2.final_state.psi)
    assert np.array_equal(r1.final_state.a, r2.final_state.a)
    assert np.array_equal(r1.final_state.b, r2.final_state.b)


def test_run_energy_conservation_short():
    cfg = SimConfig(
        n=32,
        sigma=20.0,
        t_end=0.2,
        dt=2e-3,
        output_every=10,
        initial_data=InitSpec(recipe="random_band", amplitude=0.05, seed=1),
    )
    res = run(cfg)
    growth = energy_and_growth_check(res.records)
    assert res.status == "ok"
    assert growth.energy_drift < 1e-10
    assert max(r.div_residual for r in res.records) < 1e-12


def test_run_reports_blowup_with_partial_trajectory():
    # CFL-violating fixed dt on O(1)-amplitude data must abort, not raise
    cfg = SimConfig(
        n=16,
        sigma=1.0,
        t_end=1.0,
        dt=0.5,
        initial_data=InitSpec(recipe="random_band", amplitude=3.0, seed=2),
    )
    res = run(cfg)
    assert res.status == "blowup"
    assert len(res.records) >= 1
    assert res.message != ""
    assert res.final_time < 1.0


def test_compute_diagnostics_fields(grid32):
    m = initial_state(grid32, InitSpec(recipe="random_band", amplitude=0.05, seed=3), sigma=9.0)
    rec = compute_diagnostics(m, 0.25)
    assert rec.t == 0.25
    assert rec.energy > 0
    assert set(rec.hk_norms) == {1, 2, 3}
    assert rec.hk_norms[1] <= rec.hk_norms[3]
    assert rec.disp_w1inf >= 0
    assert rec.stat_l2 >= 0
    assert rec.div_residual < 1e-12
    # stationary-only data has no dispersive W^{1,inf} content
    ms = initial_state(grid32, InitSpec(recipe="stationary_band", seed=3), sigma=9.0)
    rec_s = compute_diagnostics(ms, 0.0)
    assert rec_s.disp_w1inf == 0.0
    assert rec_s.stat_l2 > 0


def test_auto_dt_convergence_order():
    """With dt picked by the advective CFL, halving h halves dt; the
    4th-order scheme should cut the energy drift by far more than 8x.
    Amplitude is chosen big enough that the CFL cap, not the 0.1 ceiling,
    sets dt at both resolutions."""
    drifts = {}
    for n in (32, 64):
        cfg = SimConfig(
            n=n,
            sigma=5.0,
            t_end=0.25,
            dt="auto",
            output_every=1000,
            initial_data=InitSpec(recipe="random_band", amplitude=2.0, seed=6),
        )
        res = run(cfg)
        assert res.status == "ok"
        drifts[n] = energy_and_growth_check(res.records).energy_drift
    assert drifts[32] > 0
    assert drifts[32] / drifts[64] >= 8.0


def test_growth_check_constant():
    from bqsim.solver import DiagnosticsRecord

    def rec(t, e, h3, g):
        return DiagnosticsRecord(
            t=t,
            energy=e,
            hk_norms={1: h3 / 2, 2: h3 / 1.5, 3: h3},
            disp_w1inf=0.0,
            stat_l2=0.0,
            div_residual=0.0,
            grad_u_inf=g,
            grad_t_inf=0.0,
        )

    records = [rec(0.0, 1.0, 2.0, 1.0), rec(1.0, 1.0 + 1e-9, 2.0 * np.e, 1.0)]
    rep = energy_and_growth_check(records)
    assert rep.energy_drift == pytest.approx(1e-9, rel=1e-6)
    # H3 grew by factor e while int grad dt = 1 -> fitted constant ~ 1
    assert rep.fitted_growth_constant == pytest.approx(1.0, rel=1e-9)
