"""Pseudo-spectral simulator and verification harness for rotating
stratified incompressible flow with a tunable dispersion strength.

The package splits a divergence-free velocity plus scalar buoyancy state
into one stationary and two oscillatory wave components per wavenumber,
integrates the full nonlinear dynamics with an integrating-factor scheme,
and provides independent checks: a stationary-phase decay probe, a
slicewise 2D limit solver, and a dispersion-strength sweep.
"""

from .bqf import (
    read_field,
    read_mode_state,
    read_stream_state,
    write_field,
    write_mode_state,
    write_stream_state,
)
from .decay import (
    BumpSpec,
    decay_probe,
    phase_gradient,
    phase_hessian_invsqrt,
    probe_integral,
)
from .errors import (
    BlowUpError,
    CflError,
    ConfigError,
    DegenerateModeError,
    DivergenceError,
    QuadratureBudgetError,
    SymmetryError,
)
from .euler2d import (
    LimitRecord,
    LimitResult,
    StreamState,
    euler2d_step,
    limit_initial_data,
    limit_velocity,
    run_limit,
    spectral_identity_check,
    stationary_self_interaction,
)
from .field import SpectralField
from .fitting import LogLogFit, fit_loglog
from .grid import SpectralGrid, make_grid
from .modes import (
    EigenBasis,
    ModeState,
    dispersion_relation,
    eigen_basis,
    free_propagate,
    project_modes,
    reconstruct_modes,
    reconstruct_velocity,
)
from .norms import NormReport, besov_proxy, hk_norms, l2_norm, linf_norm, norms
from .solver import (
    DiagnosticsRecord,
    GrowthReport,
    InitSpec,
    RunResult,
    SimConfig,
    compute_diagnostics,
    energy_and_growth_check,
    initial_field,
    initial_state,
    nonlinear_rhs,
    run,
    step,
)
from .sweep import ConvergenceReport, SweepConfig, SweepRow, run_sigma_sweep

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "BumpSpec",
    "CflError",
    "ConfigError",
    "ConvergenceReport",
    "DegenerateModeError",
    "DiagnosticsRecord",
    "DivergenceError",
    "EigenBasis",
    "GrowthReport",
    "InitSpec",
    "LimitRecord",
    "LimitResult",
    "LogLogFit",
    "ModeState",
    "NormReport",
    "QuadratureBudgetError",
    "RunResult",
    "SimConfig",
    "SpectralField",
    "SpectralGrid",
    "StreamState",
    "SweepConfig",
    "SweepRow",
    "SymmetryError",
    "besov_proxy",
    "compute_diagnostics",
    "decay_probe",
    "dispersion_relation",
    "eigen_basis",
    "energy_and_growth_check",
    "euler2d_step",
    "fit_loglog",
    "free_propagate",
    "hk_norms",
    "initial_field",
    "initial_state",
    "l2_norm",
    "limit_initial_data",
    "limit_velocity",
    "linf_norm",
    "make_grid",
    "nonlinear_rhs",
    "norms",
    "phase_gradient",
    "phase_hessian_invsqrt",
    "probe_integral",
    "project_modes",
    "read_field",
    "read_mode_state",
    "read_stream_state",
    "reconstruct_modes",
    "reconstruct_velocity",
    "run",
    "run_limit",
    "run_sigma_sweep",
    "spectral_identity_check",
    "stationary_self_interaction",
    "step",
    "write_field",
    "write_mode_state",
    "write_stream_state",
]
