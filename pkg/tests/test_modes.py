"""Mode decomposition: eigenstructure, projection round trips, free flow."""

import numpy as np
import pytest

from bqsim.errors import DegenerateModeError, DivergenceError
from bqsim.field import SpectralField
from bqsim.modes import (
    ModeState,
    dispersion_relation,
    eigen_basis,
    free_propagate,
    phase_factors,
    project_modes,
    reconstruct_modes,
    reconstruct_velocity,
)
from bqsim.norms import l2_norm
from bqsim.operators import curl

from conftest import divfree_vector3, hermitian_scalar, random_vector4


def _vorticity_matrix(xi):
    """Linearized generator on (w_hat, T_hat), unit coupling strength."""
    x1, x2, x3 = xi
    k2 = x1 * x1 + x2 * x2 + x3 * x3
    return np.array(
        [
            [0, 0, 0, -1j * x2],
            [0, 0, 0, 1j * x1],
            [0, 0, 0, 0],
            [-1j * x2 / k2, 1j * x1 / k2, 0, 0],
        ],
        dtype=complex,
    )


def _velocity_matrix(xi):
    """Linearized generator on (u_hat, T_hat): buoyancy projected, T fed by -u3."""
    x1, x2, x3 = xi
    kh2 = x1 * x1 + x2 * x2
    k2 = kh2 + x3 * x3
    return np.array(
        [
            [0, 0, 0, -x1 * x3 / k2],
            [0, 0, 0, -x2 * x3 / k2],
            [0, 0, 0, kh2 / k2],
            [0, 0, -1, 0],
        ],
        dtype=complex,
    )


def test_dispersion_relation_values():
    assert dispersion_relation((1, 0, 0)) == pytest.approx(1.0)
    assert dispersion_relation((1, 0, 1)) == pytest.approx(1.0 / np.sqrt(2))
    assert dispersion_relation((0, 0, 3)) == 0.0
    with pytest.raises(ValueError):
        dispersion_relation((0, 0, 0))


def test_eigen_residuals_both_formulations():
    rng = np.random.default_rng(10)
    for _ in range(300):
        xi = rng.standard_normal(3) * 3
        if np.hypot(xi[0], xi[1]) < 1e-6:
            continue
        for formulation, matrix in (
            ("vorticity", _vorticity_matrix),
            ("velocity", _velocity_matrix),
        ):
            A = matrix(xi)
            basis = eigen_basis(xi, formulation=formulation)
            for vec, lam in (
                (basis.stationary, 0.0),
                (basis.plus, basis.eigenvalue_plus),
                (basis.minus, basis.eigenvalue_minus),
            ):
                res = np.linalg.norm(A @ vec - lam * vec) / np.linalg.norm(vec)
                assert res < 1e-13


def test_eigenvalues_are_the_dispersion_frequency():
    basis = eigen_basis((3.0, 4.0, 0.0))
    assert basis.eigenvalue_plus == pytest.approx(1j)
    basis = eigen_basis((1.0, 0.0, 1.0))
    assert basis.eigenvalue_plus == pytest.approx(1j / np.sqrt(2))
    assert basis.eigenvalue_minus == pytest.approx(-1j / np.sqrt(2))


def test_velocity_eigenvectors_are_orthogonal():
    rng = np.random.default_rng(11)
    for _ in range(50):
        xi = rng.standard_normal(3) * 2
        if np.hypot(xi[0], xi[1]) < 1e-6:
            continue
        b = eigen_basis(xi, formulation="velocity")
        assert abs(np.vdot(b.plus, b.minus)) < 1e-12 * np.linalg.norm(b.plus) ** 2
        assert abs(np.vdot(b.plus, b.stationary)) < 1e-12 * np.linalg.norm(b.plus) ** 2


def test_degenerate_modes_raise():
    with pytest.raises(DegenerateModeError):
        eigen_basis((0.0, 0.0, 2.0))


def test_projection_worked_single_modes(grid16):
    # w = (0,1,0), T = 1 at k = (1,0,0): pure plus wave with a = -i
    c = np.zeros((4,) + grid16.shape, complex)
    c[1, 1, 0, 0] = 1.0
    c[3, 1, 0, 0] = 1.0
    m = project_modes(SpectralField(grid16, c), sigma=1.0, check=False)
    assert m.psi[1, 0, 0] == pytest.approx(0.0)
    assert m.a[1, 0, 0] == pytest.approx(-1j)
    assert m.b[1, 0, 0] == pytest.approx(0.0)

    # w = (-1,0,1), T = 0 at k = (1,0,1): pure stationary with psi = -1
    c = np.zeros((4,) + grid16.shape, complex)
    c[0, 1, 0, 1] = -1.0
    c[2, 1, 0, 1] = 1.0
    m = project_modes(SpectralField(grid16, c), sigma=1.0, check=False)
    assert m.psi[1, 0, 1] == pytest.approx(-1.0)
    assert m.a[1, 0, 1] == pytest.approx(0.0)
    assert m.b[1, 0, 1] == pytest.approx(0.0)


def test_reconstruction_worked_single_mode(grid16):
    m = ModeState(
        grid16,
        1.0,
        np.zeros(grid16.shape, complex),
        np.zeros(grid16.shape, complex),
        np.zeros(grid16.shape, complex),
    )
    m.psi[1, 0, 1] = 1.0
    rec = reconstruct_modes(m)
    assert np.allclose(rec.coeffs[:, 1, 0, 1], [1.0, 0.0, -1.0, 0.0])


def test_round_trip_and_idempotence(grid16):
    rng = np.random.default_rng(12)
    for _ in range(20):
        v4 = random_vector4(rng, grid16, scale=0.3)
        f = SpectralField(grid16, v4)
        m = project_modes(f, sigma=2.0)
        rec = reconstruct_modes(m)
        rel = np.linalg.norm(rec.coeffs - v4) / np.linalg.norm(v4)
        assert rel < 1e-13
        again = project_modes(rec, sigma=2.0, check=False)
        for x, y in ((again.psi, m.psi), (again.a, m.a), (again.b, m.b)):
            assert np.max(np.abs(x - y)) < 1e-13


def test_projection_rejects_divergent_input(grid16):
    rng = np.random.default_rng(13)
    v4 = random_vector4(rng, grid16)
    v4[0] += 0.3 * hermitian_scalar(rng, grid16)
    with pytest.raises(DivergenceError):
        project_modes(SpectralField(grid16, v4), sigma=1.0)


def test_fiber_channels_round_trip(grid16):
    """Horizontal-mean vorticity and scalar survive project/reconstruct."""
    c = np.zeros((4,) + grid16.shape, complex)
    c[0, 0, 0, 2] = 0.5 - 0.25j
    c[0, 0, 0, -2] = 0.5 + 0.25j
    c[1, 0, 0, 2] = -0.125j
    c[1, 0, 0, -2] = 0.125j
    c[3, 0, 0, 1] = 0.75
    c[3, 0, 0, -1] = 0.75
    m = project_modes(SpectralField(grid16, c), sigma=1.0, check=False)
    assert m.psi[0, 0, 2] == pytest.approx(0.5 - 0.25j)
    assert m.a[0, 0, 2] == pytest.approx(-0.125j)
    assert m.b[0, 0, 1] == pytest.approx(0.75)
    rec = reconstruct_modes(m)
    assert np.max(np.abs(rec.coeffs - c)) < 1e-15


def test_split_parts_sum_and_energy(grid16):
    rng = np.random.default_rng(14)
    m = project_modes(SpectralField(grid16, random_vector4(rng, grid16)), sigma=3.0)
    u_full = reconstruct_velocity(m)
    u_disp = reconstruct_velocity(m.dispersive_only())
    u_stat = reconstruct_velocity(m.stationary_only())
    assert np.max(np.abs(u_disp.coeffs + u_stat.coeffs - u_full.coeffs)) < 1e-12
    # velocity parts are L2-orthogonal, so energies add
    e_full = l2_norm(u_full) ** 2
    e_sum = l2_norm(u_disp) ** 2 + l2_norm(u_stat) ** 2
    assert e_full == pytest.approx(e_sum, rel=1e-12)


def test_free_propagate_identity_and_composition(grid16):
    rng = np.random.default_rng(15)
    m = project_modes(SpectralField(grid16, random_vector4(rng, grid16)), sigma=2.5)
    m0 = free_propagate(m, 0.0)
    for x, y in ((m0.psi, m.psi), (m0.a, m.a), (m0.b, m.b)):
        assert np.array_equal(x, y)
    one = free_propagate(m, 0.7)
    two = free_propagate(free_propagate(m, 0.3), 0.4)
    for x, y in ((one.psi, two.psi), (one.a, two.a), (one.b, two.b)):
        assert np.max(np.abs(x - y)) < 1e-14


def test_free_propagate_freezes_stationary_and_fiber(grid16):
    rng = np.random.default_rng(16)
    c = np.zeros((4,) + grid16.shape, complex)
    c[0, 0, 0, 2] = 0.5
    c[0, 0, 0, -2] = 0.5
    v4 = random_vector4(rng, grid16) + c
    m = project_modes(SpectralField(grid16, v4), sigma=4.0, check=False)
    mt = free_propagate(m, 1.23)
    assert np.array_equal(mt.psi, m.psi)
    assert np.array_equal(mt.a[0, 0, :], m.a[0, 0, :])
    assert np.array_equal(mt.b[0, 0, :], m.b[0, 0, :])


def test_free_propagate_conserves_velocity_l2_exactly(grid16):
    rng = np.random.default_rng(17)
    m = project_modes(SpectralField(grid16, random_vector4(rng, grid16)), sigma=7.0)
    e0 = l2_norm(reconstruct_velocity(m))
    for t in (0.1, 1.0, 9.7):
        et = l2_norm(reconstruct_velocity(free_propagate(m, t)))
        assert abs(et - e0) / e0 < 1e-13


def test_free_propagate_per_family_vorticity_l2(grid16):
    """Each wave family alone keeps its reconstructed L2; the families are
    not orthogonal in vorticity variables, so only per-family norms freeze."""
    rng = np.random.default_rng(18)
    m = project_modes(SpectralField(grid16, random_vector4(rng, grid16)), sigma=5.0)
    zero = np.zeros_like(m.psi)
    plus = ModeState(m.grid, m.sigma, zero.copy(), m.a.copy(), zero.copy())
    e0 = l2_norm(reconstruct_modes(plus))
    et = l2_norm(reconstruct_modes(free_propagate(plus, 0.37)))
    assert abs(et - e0) / e0 < 1e-13


def test_free_propagate_preserves_reality(grid16):
    rng = np.random.default_rng(19)
    m = project_modes(SpectralField(grid16, random_vector4(rng, grid16)), sigma=3.0)
    rec = reconstruct_modes(free_propagate(m, 0.81))
    from bqsim.field import hermitian_residual

    assert hermitian_residual(rec) < 1e-12


def test_phase_factors_unit_magnitude(grid16):
    ph = phase_factors(grid16, sigma=6.0, t=0.9)
    assert np.max(np.abs(np.abs(ph) - 1.0)) < 1e-14
    assert np.all(ph[0, 0, :] == 1.0)


def test_free_propagate_rejects_negative_time(grid16):
    m = ModeState(
        grid16,
        1.0,
        np.zeros(grid16.shape, complex),
        np.zeros(grid16.shape, complex),
        np.zeros(grid16.shape, complex),
    )
    with pytest.raises(ValueError):
        free_propagate(m, -0.5)
