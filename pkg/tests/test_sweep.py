import numpy as np
import pytest

from bqsim.errors import ConfigError
from bqsim.solver import InitSpec, SimConfig
from bqsim.sweep import WARMUP_SIGMA_T, ConvergenceReport, SweepConfig, run_sigma_sweep


def _base(n=16, t_end=0.5, amplitude=0.05, seed=0):
    return SimConfig(
        n=n,
        sigma=1.0,
        t_end=t_end,
        initial_data=InitSpec(recipe="stationary_band", amplitude=amplitude, seed=seed),
    )


def test_sweep_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(base=_base(), sigmas=(10.0, 10.0))
    with pytest.raises(ConfigError):
        SweepConfig(base=_base(), sigmas=(40.0, 10.0))
    with pytest.raises(ConfigError):
        SweepConfig(base=_base(), sigmas=(-1.0, 10.0))
    with pytest.raises(ConfigError):
        SweepConfig(base=_base(), sigmas=())
    with pytest.raises(ConfigError):
        SweepConfig(base=_base(t_end=0.5), sigmas=(10.0,), measure_time=1.0)
    with pytest.raises(ConfigError):
        SweepConfig(base=_base(), sigmas=(10.0,), measure_time=0.5, fit_window=(80.0, 20.0))


def test_boundary_layer_flag_and_warmup():
    """sigma * t < 1 marks the row as inside the initial layer; rows with
    sigma * t below the warm-up threshold stay out of the fit set."""
    cfg = SweepConfig(
        base=_base(t_end=0.1),
        sigmas=(4.0, 30.0, 120.0),
        measure_time=0.1,
    )
    report = run_sigma_sweep(cfg)
    flags = {r.sigma: r.boundary_layer_flag for r in report.rows}
    assert flags == {4.0: True, 30.0: False, 120.0: False}
    # sigma*t: 0.4, 3.0, 12.0 -> only 120 clears the warm-up threshold of 5
    assert report.fit_sigmas == (120.0,)
    assert report.disp_slope is None  # one point cannot fix a slope
    assert all(r.status == "ok" for r in report.rows)
    assert WARMUP_SIGMA_T == 5.0


def test_sweep_rows_and_gap_positive():
    cfg = SweepConfig(base=_base(t_end=0.5), sigmas=(20.0, 60.0), measure_time=0.5)
    report = run_sigma_sweep(cfg)
    assert [r.sigma for r in report.rows] == [20.0, 60.0]
    for r in report.rows:
        assert r.status == "ok"
        assert r.disp_w1inf > 0  # waves generated by the nonlinear coupling
        assert r.stat_l2_gap > 0
        assert np.isfinite(r.max_h3)
        assert not r.boundary_layer_flag
    assert report.fit_sigmas == (20.0, 60.0)
    assert report.disp_slope is not None
    assert report.gap_slope is not None


def test_sweep_threads_match_serial():
    cfg = SweepConfig(base=_base(t_end=0.25), sigmas=(25.0, 50.0), measure_time=0.25)
    serial = run_sigma_sweep(cfg, threads=1)
    parallel = run_sigma_sweep(cfg, threads=2)
    for a, b in zip(serial.rows, parallel.rows):
        assert a == b


def test_fit_window_restricts_fit():
    cfg = SweepConfig(
        base=_base(t_end=0.5),
        sigmas=(20.0, 40.0, 80.0),
        measure_time=0.5,
        fit_window=(30.0, 100.0),
    )
    report = run_sigma_sweep(cfg)
    assert report.fit_sigmas == (40.0, 80.0)
