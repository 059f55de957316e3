"""Command-line front end: `simulate run|figure|validate`.

Outputs are deterministic: floats are written with 17 significant digits,
column order is fixed, and sweep rows are assembled in grid order no matter
how many workers computed them.  Set SIMULATE_MAX_WORKERS to cap
parallelism regardless of what a config or --workers asks for.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .collective import PatternSpec, excited_population, in_phase_alpha
from .dynamics import evolve, ground_state, observables, solve_steady
from .figures import SweepResult, build_preset, preset_names
from .model import RegimeWarning, SystemParams, build_liouvillian, build_space
from .spectrum import ProbeParams, excitation_spectrum, probe_stark_shift

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_REGIME = 4

WORKER_ENV = "SIMULATE_MAX_WORKERS"

NAN = float("nan")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config ---

_PARAM_KEYS = {"positions", "g0", "omega", "kappa", "delta", "delta_c",
               "theta", "gamma", "omega_n"}
_SWEEP_KEYS = {"param", "start", "stop", "points", "scale"}
_TOP_KEYS = {"mode", "params", "sweep", "sweep2", "output", "seed",
             "n_workers", "probe", "stark", "pattern", "evolve", "n_max",
             "figure", "points"}
_MODES = {"steady", "evolve", "spectrum", "stark", "collective", "figure"}

# sweepable scalars, per mode
_SWEEPABLE = {
    "steady": {"kappa", "delta", "delta_c", "omega", "g0", "theta"},
    "evolve": {"kappa", "delta", "delta_c", "omega", "g0", "theta",
               "t_final"},
    "spectrum": {"delta_p", "kappa", "delta", "delta_c", "omega", "g0"},
    "stark": {"x_probe", "delta_2", "kappa", "delta", "delta_c", "omega",
              "g0"},
    "collective": {"n_atoms", "kappa", "delta", "delta_c", "omega", "g0"},
}


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _parse_sweep(raw: dict, mode: str, where: str) -> dict:
    _require_keys(raw, _SWEEP_KEYS, where)
    for key in ("param", "start", "stop", "points"):
        if key not in raw:
            raise ConfigError(f"{where} is missing '{key}'")
    param = raw["param"]
    swp = {
        "param": param,
        "start": float(raw["start"]),
        "stop": float(raw["stop"]),
        "points": int(raw["points"]),
        "scale": raw.get("scale", "linear"),
    }
    if param.startswith("position["):
        if not param.endswith("]"):
            raise ConfigError(f"malformed sweep param '{param}'")
        try:
            int(param[len("position["):-1])
        except ValueError:
            raise ConfigError(f"malformed sweep param '{param}'") from None
    elif param not in _SWEEPABLE[mode]:
        raise ConfigError(
            f"'{param}' is not sweepable in mode '{mode}' "
            f"(allowed: {sorted(_SWEEPABLE[mode])} and position[i])")
    if swp["scale"] not in ("linear", "log"):
        raise ConfigError(f"{where}: scale must be 'linear' or 'log'")
    if swp["points"] < 2:
        raise ConfigError(f"{where}: points must be >= 2 when sweeping")
    if not (math.isfinite(swp["start"]) and math.isfinite(swp["stop"])):
        raise ConfigError(f"{where}: sweep range must be finite")
    if not swp["start"] < swp["stop"]:
        raise ConfigError(f"{where}: start must be < stop")
    if swp["scale"] == "log" and swp["start"] <= 0:
        raise ConfigError(f"{where}: log scale needs start > 0")
    return swp


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _require_keys(raw, _TOP_KEYS, "config")

    mode = raw.get("mode")
    if mode not in _MODES:
        raise ConfigError(f"mode must be one of {sorted(_MODES)}")

    cfg = {
        "mode": mode,
        "seed": int(raw.get("seed", 0)),
        "n_workers": int(raw.get("n_workers", 1)),
        "n_max": raw.get("n_max"),
        "points": raw.get("points"),
    }
    if cfg["n_workers"] < 1:
        raise ConfigError("n_workers must be >= 1")

    out = raw.get("output", {})
    _require_keys(out, {"path", "format"}, "output")
    cfg["output_path"] = out.get("path")
    cfg["output_format"] = out.get("format", "csv")
    if cfg["output_format"] not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'")

    if mode == "figure":
        name = raw.get("figure")
        if name not in preset_names():
            raise ConfigError(
                f"unknown figure '{name}' (known: {preset_names()})")
        cfg["figure"] = name
        return cfg

    params_raw = raw.get("params")
    if not isinstance(params_raw, dict):
        raise ConfigError("'params' object is required for this mode")
    _require_keys(params_raw, _PARAM_KEYS, "params")
    try:
        base = SystemParams(
            positions=tuple(float(x) for x in params_raw["positions"]),
            g0=float(params_raw["g0"]),
            omega=float(params_raw["omega"]),
            kappa=float(params_raw.get("kappa", 0.0)),
            delta=float(params_raw.get("delta", 0.0)),
            delta_c=float(params_raw.get("delta_c", 0.0)),
            theta=float(params_raw.get("theta", math.pi / 2)),
            gamma=float(params_raw.get("gamma", 1.0)),
            omega_n=(tuple(float(x) for x in params_raw["omega_n"])
                     if params_raw.get("omega_n") is not None else None),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid params: {exc}") from None
    cfg["params"] = base

    probe = raw.get("probe", {})
    _require_keys(probe, {"omega_p", "delta_p"}, "probe")
    cfg["probe_omega_p"] = float(probe.get("omega_p", 1e-3))
    cfg["probe_delta_p"] = float(probe.get("delta_p", 0.0))

    stark = raw.get("stark", {})
    _require_keys(stark, {"x_probe", "delta_2"}, "stark")
    cfg["x_probe"] = float(stark.get("x_probe", 0.25))
    cfg["delta_2"] = float(stark.get("delta_2", 1000.0))
    if mode == "stark" and cfg["delta_2"] == 0:
        raise ConfigError("stark.delta_2 must be nonzero")

    pattern = raw.get("pattern", {})
    _require_keys(pattern, {"n_atoms", "parity"}, "pattern")
    cfg["pattern_n"] = int(pattern.get("n_atoms", base.n_atoms))
    cfg["pattern_parity"] = int(pattern.get("parity", 0))
    if mode == "collective":
        try:
            PatternSpec(cfg["pattern_n"], cfg["pattern_parity"])
        except ValueError as exc:
            raise ConfigError(f"invalid pattern: {exc}") from None

    ev = raw.get("evolve", {})
    _require_keys(ev, {"t_final"}, "evolve")
    cfg["t_final"] = float(ev.get("t_final", 10.0))
    if cfg["t_final"] < 0:
        raise ConfigError("evolve.t_final must be >= 0")

    for which in ("sweep", "sweep2"):
        cfg[which] = (_parse_sweep(raw[which], mode, which)
                      if raw.get(which) is not None else None)
    if cfg["sweep2"] is not None and cfg["sweep"] is None:
        raise ConfigError("sweep2 requires sweep")
    return cfg


def _sweep_values(swp: dict) -> np.ndarray:
    if swp["scale"] == "log":
        return np.geomspace(swp["start"], swp["stop"], swp["points"])
    return np.linspace(swp["start"], swp["stop"], swp["points"])


# --------------------------------------------------------------- running ---

def _apply(cfg: dict, assignments: dict) -> dict:
    """New point-config with swept values substituted."""
    point = dict(cfg)
    params = cfg["params"]
    fields = {"positions": list(params.positions), "g0": params.g0,
              "omega": params.omega, "kappa": params.kappa,
              "delta": params.delta, "delta_c": params.delta_c,
              "theta": params.theta, "gamma": params.gamma,
              "omega_n": params.omega_n}
    for name, value in assignments.items():
        if name.startswith("position["):
            idx = int(name[len("position["):-1])
            if not 0 <= idx < len(fields["positions"]):
                raise ConfigError(f"position index {idx} out of range")
            fields["positions"][idx] = value
        elif name == "t_final":
            point["t_final"] = value
        elif name == "delta_p":
            point["probe_delta_p"] = value
        elif name == "x_probe":
            point["x_probe"] = value
        elif name == "delta_2":
            point["delta_2"] = value
        elif name == "n_atoms":
            point["pattern_n"] = int(round(value))
        else:
            fields[name] = value
    fields["positions"] = tuple(fields["positions"])
    point["params"] = SystemParams(**fields)
    return point


_OBS_COLUMNS = ["i_at", "i_cav", "mean_n", "re_alpha", "im_alpha", "g2",
                "n_max", "residual"]


def _obs_row(obs, n_max, residual) -> list:
    return [obs.i_at_total, obs.i_cav, obs.mean_n, obs.alpha.real,
            obs.alpha.imag, obs.g2_zero if obs.g2_zero is not None else NAN,
            n_max, residual]


def _echo_columns(point: dict) -> tuple[list[str], list]:
    p = point["params"]
    cols = ["p_g0", "p_omega", "p_kappa", "p_delta", "p_delta_c", "p_theta",
            "p_gamma", "p_positions"]
    vals = [p.g0, p.omega, p.kappa, p.delta, p.delta_c, p.theta, p.gamma,
            ";".join(_fmt_float(x) for x in p.positions)]
    return cols, vals


def _run_point(point: dict) -> list:
    mode = point["mode"]
    params = point["params"]
    if mode == "steady":
        sol = solve_steady(params, n_max=point["n_max"])
        obs = observables(sol.rho, params)
        return _obs_row(obs, sol.n_max, sol.residual)
    if mode == "evolve":
        space = build_space(params, point["n_max"])
        l = build_liouvillian(params, space)
        rho = evolve(ground_state(space), l, point["t_final"])
        obs = observables(rho, params)
        return _obs_row(obs, space.n_max, NAN)
    if mode == "spectrum":
        probe = ProbeParams(omega_p_tilde=point["probe_omega_p"])
        return [excitation_spectrum(point["probe_delta_p"], params, probe)]
    if mode == "stark":
        return [probe_stark_shift(point["x_probe"], point["delta_2"],
                                  params)]
    if mode == "collective":
        pattern = PatternSpec(point["pattern_n"], point["pattern_parity"])
        alpha = in_phase_alpha(pattern, params)
        pi_e = excited_population(pattern, params)
        return [alpha.real, alpha.imag, abs(alpha) ** 2,
                params.kappa * abs(alpha) ** 2,
                pattern.n_atoms * params.gamma * pi_e, pi_e]
    raise ConfigError(f"mode '{mode}' cannot run directly")


_MODE_COLUMNS = {
    "steady": _OBS_COLUMNS,
    "evolve": _OBS_COLUMNS,
    "spectrum": ["w"],
    "stark": ["shift"],
    "collective": ["re_alpha", "im_alpha", "mean_n", "i_cav", "i_at",
                   "pi_e"],
}


def resolve_workers(requested: int | None) -> int:
    n = requested if requested and requested > 0 else 1
    cap = os.environ.get(WORKER_ENV)
    if cap is not None:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"{WORKER_ENV} must be an integer") from None
    return n


def _map_ordered(fn, items, n_workers: int) -> list:
    if n_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as ex:
        return list(ex.map(fn, items))


def run_config(cfg: dict, n_workers: int | None = None) -> SweepResult:
    """Evaluate a parsed config; rows in grid order, failures marked nan."""
    if cfg["mode"] == "figure":
        return run_figure(cfg["figure"], points=cfg.get("points"),
                          n_workers=n_workers or cfg["n_workers"])

    sweeps = [s for s in (cfg["sweep"], cfg["sweep2"]) if s is not None]
    axes = [(_sweep_values(s), s["param"]) for s in sweeps]
    if not axes:
        grid = [{}]
    elif len(axes) == 1:
        vals, name = axes[0]
        grid = [{name: float(v)} for v in vals]
    else:
        (v1, n1), (v2, n2) = axes
        grid = [{n1: float(a), n2: float(b)} for a in v1 for b in v2]

    axis_names = [name for _, name in axes]
    echo_cols, _ = _echo_columns(cfg)
    columns = axis_names + _MODE_COLUMNS[cfg["mode"]] + echo_cols + ["ok"]

    def one(assignments: dict) -> tuple:
        point = _apply(cfg, assignments)
        axis_vals = [assignments[name] for name in axis_names]
        _, echo = _echo_columns(point)
        try:
            body = _run_point(point)
            return tuple(axis_vals + body + echo + [1])
        except (ConfigError, RegimeWarning):
            raise
        except Exception:
            pad = [NAN] * len(_MODE_COLUMNS[cfg["mode"]])
            return tuple(axis_vals + pad + echo + [0])

    rows = _map_ordered(one, grid, resolve_workers(n_workers
                                                   or cfg["n_workers"]))
    meta = {"mode": cfg["mode"], "grid_size": len(grid), "seed": cfg["seed"]}
    failed = sum(1 for r in rows if r[-1] == 0)
    return SweepResult(columns=columns, rows=rows, metadata=meta,
                       n_failed=failed)


def run_figure(name: str, points: int | None = None,
               n_workers: int | None = None) -> SweepResult:
    try:
        preset, grid = build_preset(name, points)
    except KeyError:
        raise ConfigError(
            f"unknown figure '{name}' (known: {preset_names()})") from None

    def one(item):
        try:
            return preset.point(item), True
        except RegimeWarning:
            raise
        except Exception:
            head = item if isinstance(item, tuple) else (item,)
            pad = (NAN,) * (len(preset.columns) - len(head))
            return tuple(head) + pad, False

    results = _map_ordered(one, grid, resolve_workers(n_workers))
    rows = [row for row, _ in results]
    meta = dict(preset.metadata, figure=name, grid_size=len(grid))
    return SweepResult(columns=preset.columns, rows=rows, metadata=meta,
                       n_failed=sum(1 for _, ok in results if not ok))


# --------------------------------------------------------------- writing ---

def _fmt_float(v) -> str:
    return format(float(v), ".17g")


def _fmt_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, int, np.integer)):
        return str(int(v))
    if v is None:
        return "nan"
    return _fmt_float(v)


def write_csv(result: SweepResult, path: str) -> None:
    lines = [",".join(result.columns)]
    lines += [",".join(_fmt_cell(v) for v in row) for row in result.rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(result: SweepResult, path: str) -> None:
    payload = {
        "columns": result.columns,
        "rows": [[_fmt_cell(v) for v in row] for row in result.rows],
        "metadata": result.metadata,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=1) + "\n",
        encoding="utf-8")


def _write(result: SweepResult, path: str, fmt: str) -> None:
    if fmt == "json":
        write_json(result, path)
    else:
        write_csv(result, path)


# ------------------------------------------------------------------ main ---

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Driven atoms in a lossy cavity: sweeps and presets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config file")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--strict", action="store_true",
                       help="treat regime-validity warnings as fatal")

    p_fig = sub.add_parser("figure", help="run a named preset")
    p_fig.add_argument("name")
    p_fig.add_argument("--out", default=".", help="output directory")
    p_fig.add_argument("--workers", type=int, default=None)
    p_fig.add_argument("--points", type=int, default=None,
                       help="override the preset grid size")
    p_fig.add_argument("--strict", action="store_true")

    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    strict = getattr(args, "strict", False)
    try:
        with warnings.catch_warnings():
            if strict:
                warnings.simplefilter("error", RegimeWarning)
            if args.command == "validate":
                load_config(args.config)
                print(f"{args.config}: ok")
                return EXIT_OK
            if args.command == "run":
                cfg = load_config(args.config)
                result = run_config(cfg, n_workers=args.workers)
                path = cfg["output_path"] or "result.csv"
                _write(result, path, cfg["output_format"])
            else:
                result = run_figure(args.name, points=args.points,
                                    n_workers=args.workers)
                path = str(Path(args.out) / f"{args.name}.csv")
                write_csv(result, path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeWarning as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except Exception as exc:  # solver-level failure
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    n_rows = len(result.rows)
    if result.n_failed == n_rows and n_rows > 0:
        print("all sweep points failed", file=sys.stderr)
        return EXIT_SOLVER
    print(f"wrote {path} ({n_rows} rows, {result.n_failed} failed)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
