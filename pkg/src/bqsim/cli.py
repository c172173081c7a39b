"""Command-line front end.

Subcommands: ``simulate`` (one solver run), ``decay-probe`` (oscillatory
integral over a log-spaced time grid), ``sigma-sweep`` (convergence to
the slicewise 2D limit), ``identity-check`` (stationary self-interaction
battery).  Each takes ``--config`` (JSON), ``--out`` (directory), and
``--threads``.  Exit codes: 0 ok, 2 config error, 3 numerical failure.

Every command writes ``diagnostics.csv``, ``report.json``, and
``manifest.json`` into the output directory; field snapshots go under
``fields/``.  Outputs carry no timestamps and all floats are emitted
with shortest round-trip formatting, so a pinned config reproduces its
artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bqf import write_mode_state, write_stream_state
from .decay import BumpSpec, decay_probe
from .errors import BlowUpError, ConfigError, QuadratureBudgetError
from .euler2d import StreamState, spectral_identity_check
from .fitting import fit_loglog
from .grid import make_grid
from .solver import InitSpec, SimConfig, energy_and_growth_check, run
from .sweep import SweepConfig, run_sigma_sweep

__all__ = ["main"]

FORMAT_VERSION = 1

_SCHEMAS = {
    "simulate": ["t", "energy", "h1", "h2", "h3", "disp_w1inf", "stat_l2", "div_residual"],
    "decay-probe": ["t", "sup_abs_I"],
    "sigma-sweep": ["sigma", "status", "disp_w1inf", "stat_l2_gap", "boundary_layer_flag", "max_h3"],
    "identity-check": ["name", "residual"],
}

DEFAULT_SAMPLE_POINTS = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.5), (0.0, 0.0, -0.5), (0.7, -0.4, 0.3))


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out: Path, command: str, config_echo: dict) -> None:
    canon = json.dumps(config_echo, sort_keys=True)
    _write_json(
        out / "manifest.json",
        {
            "format_version": FORMAT_VERSION,
            "command": command,
            "config": config_echo,
            "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
            "csv_schema": _SCHEMAS[command],
            "versions": {
                "bqsim": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": ".".join(str(v) for v in sys.version_info[:3]),
            },
        },
    )


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = Path(path).read_text()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"invalid JSON in {path}: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return doc


def _reject_unknown(d: dict, known, prefix: str) -> None:
    for key in d:
        if key not in known:
            raise ConfigError(f"{prefix}{key}", "unknown field")


def _as_float(d: dict, key: str, prefix: str, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{prefix}{key}", "required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{prefix}{key}", "must be a number")
    return float(v)


def _as_int(d: dict, key: str, prefix: str, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{prefix}{key}", "required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{prefix}{key}", "must be an integer")
    return v


def _build_init_spec(d, prefix: str) -> InitSpec:
    if not isinstance(d, dict):
        raise ConfigError(prefix.rstrip("."), "must be an object")
    _reject_unknown(d, {"recipe", "amplitude", "seed", "band", "modes"}, prefix)
    band = d.get("band", [1.0, 4.0])
    if not isinstance(band, (list, tuple)) or len(band) != 2:
        raise ConfigError(f"{prefix}band", "must be a pair [lo, hi]")
    modes = []
    for i, entry in enumerate(d.get("modes", [])):
        try:
            xi, channel, value = entry
            modes.append((tuple(int(c) for c in xi), str(channel), (float(value[0]), float(value[1]))))
        except (TypeError, ValueError, IndexError) as e:
            raise ConfigError(f"{prefix}modes[{i}]", "must be [[k1,k2,k3], channel, [re,im]]") from e
    return InitSpec(
        recipe=d.get("recipe", "random_band"),
        amplitude=_as_float(d, "amplitude", prefix, 0.05),
        seed=_as_int(d, "seed", prefix, 0),
        band=(float(band[0]), float(band[1])),
        modes=tuple(modes),
    )


def _build_sim_config(d: dict, prefix: str = "", defaults: dict | None = None) -> SimConfig:
    merged = dict(defaults or {})
    merged.update(d)
    _reject_unknown(
        merged,
        {"n", "sigma", "t_end", "dt", "box_length", "initial_data", "output_every", "dealias"},
        prefix,
    )
    n = merged.get("n")
    if n is None:
        raise ConfigError(f"{prefix}n", "required")
    if isinstance(n, list):
        n = tuple(int(v) for v in n)
    elif isinstance(n, int) and not isinstance(n, bool):
        pass
    else:
        raise ConfigError(f"{prefix}n", "must be an integer or a triple")
    dt = merged.get("dt", "auto")
    if dt != "auto":
        if isinstance(dt, bool) or not isinstance(dt, (int, float)):
            raise ConfigError(f"{prefix}dt", 'must be a number or "auto"')
        dt = float(dt)
    dealias = merged.get("dealias", True)
    if not isinstance(dealias, bool):
        raise ConfigError(f"{prefix}dealias", "must be a boolean")
    return SimConfig(
        n=n,
        sigma=_as_float(merged, "sigma", prefix),
        t_end=_as_float(merged, "t_end", prefix),
        dt=dt,
        box_length=_as_float(merged, "box_length", prefix, 2.0 * np.pi),
        initial_data=_build_init_spec(merged.get("initial_data", {}), f"{prefix}initial_data."),
        output_every=_as_int(merged, "output_every", prefix, 1),
        dealias=dealias,
    )


def _fit_dict(fit) -> dict | None:
    if fit is None:
        return None
    return {"slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual}


def _cmd_simulate(config: dict, out: Path, threads: int) -> int:
    cfg = _build_sim_config(config)
    fields_dir = out / "fields"
    fields_dir.mkdir(parents=True, exist_ok=True)

    def snap(t, m):
        if t == 0.0:
            write_mode_state(fields_dir / "initial.bqf", m)

    result = run(cfg, on_sample=snap)
    write_mode_state(fields_dir / "final.bqf", result.final_state, {"time": result.final_time})

    rows = [
        [r.t, r.energy, r.hk_norms[1], r.hk_norms[2], r.hk_norms[3], r.disp_w1inf, r.stat_l2, r.div_residual]
        for r in result.records
    ]
    _write_csv(out / "diagnostics.csv", _SCHEMAS["simulate"], rows)

    growth = energy_and_growth_check(result.records)
    final = result.records[-1]
    _write_json(
        out / "report.json",
        {
            "status": result.status,
            "message": result.message,
            "final_time": result.final_time,
            "growth": {
                "energy_initial": growth.energy_initial,
                "energy_drift": growth.energy_drift,
                "fitted_growth_constant": growth.fitted_growth_constant,
                "max_hk_ratio": {str(k): v for k, v in growth.max_hk_ratio.items()},
            },
            "final": {
                "energy": final.energy,
                "disp_w1inf": final.disp_w1inf,
                "stat_l2": final.stat_l2,
                "div_residual": final.div_residual,
                "hk": {str(k): v for k, v in final.hk_norms.items()},
            },
        },
    )
    _write_manifest(out, "simulate", config)
    if result.status != "ok":
        print(f"run aborted: {result.message}", file=sys.stderr)
        return 3
    return 0


def _cmd_decay_probe(config: dict, out: Path, threads: int) -> int:
    _reject_unknown(
        config,
        {"t_min", "t_max", "num_t", "bump", "sample_points", "nodes_per_wavelength", "max_nodes"},
        "",
    )
    t_min = _as_float(config, "t_min", "", 100.0)
    t_max = _as_float(config, "t_max", "", 10000.0)
    num_t = _as_int(config, "num_t", "", 20)
    if t_min <= 0 or t_max < t_min:
        raise ConfigError("t_min", "need 0 < t_min <= t_max")
    if num_t < 1:
        raise ConfigError("num_t", "must be at least 1")
    bump_cfg = config.get("bump", {})
    _reject_unknown(bump_cfg, {"amplitude", "width", "support"}, "bump.")
    support = bump_cfg.get("support", [0.5, 2.0])
    try:
        bump = BumpSpec(
            amplitude=_as_float(bump_cfg, "amplitude", "bump.", 1.0),
            width=_as_float(bump_cfg, "width", "bump.", 1.0),
            support=(float(support[0]), float(support[1])),
        )
    except ValueError as e:
        raise ConfigError("bump", str(e)) from e
    points = config.get("sample_points", [list(p) for p in DEFAULT_SAMPLE_POINTS])
    if not isinstance(points, list) or not points:
        raise ConfigError("sample_points", "must be a nonempty list of 3-vectors")
    npw = _as_float(config, "nodes_per_wavelength", "", 20.0)
    max_nodes = _as_int(config, "max_nodes", "", 2_000_000_000)

    ts = np.logspace(np.log10(t_min), np.log10(t_max), num_t) if num_t > 1 else np.array([t_min])
    sups = [decay_probe(float(t), bump, points, npw, max_nodes) for t in ts]

    _write_csv(out / "diagnostics.csv", _SCHEMAS["decay-probe"], list(map(list, zip(ts, sups))))
    fit = fit_loglog(ts, sups) if num_t > 1 else None
    _write_json(
        out / "report.json",
        {
            "fit": _fit_dict(fit),
            "points": [[float(t), float(v)] for t, v in zip(ts, sups)],
            "sample_points": [list(map(float, p)) for p in points],
        },
    )
    _write_manifest(out, "decay-probe", config)
    return 0


def _cmd_sigma_sweep(config: dict, out: Path, threads: int) -> int:
    _reject_unknown(config, {"sigmas", "measure_time", "fit_window", "base"}, "")
    sigmas = config.get("sigmas", [10.0, 20.0, 40.0, 80.0, 160.0])
    if not isinstance(sigmas, list) or not all(
        isinstance(s, (int, float)) and not isinstance(s, bool) for s in sigmas
    ):
        raise ConfigError("sigmas", "must be a list of numbers")
    measure_time = _as_float(config, "measure_time", "", 1.0)
    window = config.get("fit_window")
    if window is not None:
        if not isinstance(window, list) or len(window) != 2:
            raise ConfigError("fit_window", "must be [lo, hi]")
        window = (float(window[0]), float(window[1]))
    base = _build_sim_config(
        config.get("base", {}),
        prefix="base.",
        defaults={
            "n": 32,
            "sigma": float(sigmas[0]) if sigmas else 1.0,
            "t_end": measure_time,
            "initial_data": {"recipe": "stationary_band"},
        },
    )
    sweep_cfg = SweepConfig(
        base=base,
        sigmas=tuple(float(s) for s in sigmas),
        measure_time=measure_time,
        fit_window=window,
    )
    report = run_sigma_sweep(sweep_cfg, threads=threads)

    _write_csv(
        out / "diagnostics.csv",
        _SCHEMAS["sigma-sweep"],
        [
            [r.sigma, r.status, r.disp_w1inf, r.stat_l2_gap, r.boundary_layer_flag, r.max_h3]
            for r in report.rows
        ],
    )

    def row_dict(r):
        bad = r.status != "ok"
        return {
            "sigma": r.sigma,
            "status": r.status,
            "disp_w1inf": None if bad else r.disp_w1inf,
            "stat_l2_gap": None if bad else r.stat_l2_gap,
            "boundary_layer_flag": r.boundary_layer_flag,
            "max_h3": None if bad else r.max_h3,
            "message": r.message,
        }

    _write_json(
        out / "report.json",
        {
            "rows": [row_dict(r) for r in report.rows],
            "disp_slope": _fit_dict(report.disp_slope),
            "gap_slope": _fit_dict(report.gap_slope),
            "disp_monotone": report.disp_monotone,
            "gap_monotone": report.gap_monotone,
            "fit_sigmas": list(report.fit_sigmas),
        },
    )
    _write_manifest(out, "sigma-sweep", config)
    if any(r.status != "ok" for r in report.rows):
        print("one or more sweep rows failed", file=sys.stderr)
        return 3
    return 0


def _identity_battery(name: str, n: int, seed: int, grid) -> StreamState:
    psi = np.zeros(grid.shape, dtype=np.complex128)
    if name == "eigenfunction":
        # sin x1 sin x2: product of two odd one-mode factors
        psi[1, 1, 0] = -0.25
        psi[-1, 1, 0] = 0.25
        psi[1, -1, 0] = 0.25
        psi[-1, -1, 0] = -0.25
    elif name == "two_mode":
        psi[1, 0, 0] = -0.5j
        psi[-1, 0, 0] = 0.5j
        psi[0, 2, 0] = -0.5j
        psi[0, -2, 0] = 0.5j
    elif name == "random":
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        band = grid.kmag <= (n // 6) * (2.0 * np.pi / grid.lengths[0])
        z = z * band
        rev = np.conj(np.roll(z[::-1, ::-1, ::-1], (1, 1, 1), axis=(0, 1, 2)))
        psi = 0.5 * (z + rev)
        # unit L2 scale keeps the quadratic roundoff of the check near machine level
        psi /= np.sqrt(grid.volume * np.sum(np.abs(psi) ** 2))
    else:
        raise ConfigError("battery", f"unknown battery entry {name!r}")
    return StreamState(grid, psi)


def _cmd_identity_check(config: dict, out: Path, threads: int) -> int:
    _reject_unknown(config, {"n", "seed", "battery", "tolerance", "bracket_sign"}, "")
    n = _as_int(config, "n", "", 32)
    seed = _as_int(config, "seed", "", 0)
    tol = _as_float(config, "tolerance", "", 1e-10)
    sign = _as_float(config, "bracket_sign", "", 1.0)
    battery = config.get("battery", ["eigenfunction", "two_mode", "random"])
    if not isinstance(battery, list):
        raise ConfigError("battery", "must be a list of battery names")
    if not battery:
        raise ConfigError("battery", "battery is empty")
    grid = make_grid(n, n, n)
    results = []
    for name in battery:
        state = _identity_battery(str(name), n, seed, grid)
        results.append((str(name), float(spectral_identity_check(state, bracket_sign=sign))))

    _write_csv(out / "diagnostics.csv", _SCHEMAS["identity-check"], [list(r) for r in results])
    ok = all(res < tol for _, res in results)
    _write_json(
        out / "report.json",
        {
            "results": [{"name": nm, "residual": res} for nm, res in results],
            "tolerance": tol,
            "pass": ok,
        },
    )
    _write_manifest(out, "identity-check", config)
    if not ok:
        print("identity residual above tolerance", file=sys.stderr)
        return 3
    return 0


_COMMANDS = {
    "simulate": (_cmd_simulate, True),
    "decay-probe": (_cmd_decay_probe, True),
    "sigma-sweep": (_cmd_sigma_sweep, True),
    "identity-check": (_cmd_identity_check, False),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bqsim",
        description="Pseudo-spectral simulator and verification harness for "
        "dispersion-coupled incompressible flow.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, config_required) in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1, help="parallelism cap")
    args = parser.parse_args(argv)

    handler, _ = _COMMANDS[args.command]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        config = _load_config(args.config)
        return handler(config, out, max(1, args.threads))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except QuadratureBudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BlowUpError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
