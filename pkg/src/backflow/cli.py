"""The `backflow` command.

One subcommand per diagnostic: ml, quantum-traj, quantum-nqe, quantum-phase,
classical-traj, classical-map, alpha-sweep, backflow. Parameters come from
flags, optionally seeded by a JSON config file (--config); flags win, and a
config key that no flag matches is a hard usage error. Numeric results go to
CSV, run provenance (resolved config, version, wall time) to a side-car
.meta.json, and grids optionally to an SVG heatmap. Deterministic runs
rewrite CSV and SVG byte-identically; only the meta wall time varies.

Exit codes follow the error taxonomy in errors.py; failures print a single
`category: message` line to stderr. BACKFLOW_OUTDIR sets the default output
directory.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .classical import (Generator3, MemoryConfig, default_generator,
                        erlang2_monte_carlo, erlang2_propagate,
                        fractional_propagate, gme_exponential_propagate,
                        markov_trajectory)
from .errors import BackflowError, OutputError, UsageError
from .functional import backflow_functional
from .mittag import ml_neg
from .quantum import (DEFAULT_HORIZON_LAM, DEFAULT_PPP, QuantumParams,
                      n_qe_result, sample_bqe)
from .serialize import (backflow_json, meta_json, phase_grid_csv,
                        phase_grid_svg, read_trajectory_csv, trajectory_csv)
from .sweeps import classical_alpha_sweep, quantum_phase_diagram, simplex_map
from .trajectory import Trajectory

MODELS = {"markov": "markov", "gme": "gme_exponential",
          "erlang2": "erlang2_embedded", "erlang2-mc": "erlang2_montecarlo",
          "fractional": "fractional"}
METRIC_CHOICES = ("delta_h", "n_h", "n_dkl")

_REQUIRED = object()


def _opt(name, kind, default, help_, choices=None):
    return {"name": name, "kind": kind, "default": default, "help": help_,
            "choices": choices}


_COMMON_OUT = [
    _opt("outdir", "str", None,
         "output directory (default: $BACKFLOW_OUTDIR or '.')"),
]

SCHEMAS = {
    "ml": [
        _opt("alpha", "float", None, "fractional order in (0, 1]"),
        _opt("x", "float", None, "non-negative argument"),
        _opt("batch", "flag", False,
             "read whitespace-separated 'alpha x' pairs from stdin, "
             "one result per line"),
    ],
    "quantum-traj": [
        _opt("alpha", "float", _REQUIRED, "fractional order in (0, 1]"),
        _opt("lam", "float", 1.0, "relaxation rate"),
        _opt("omega", "float", _REQUIRED, "oscillation frequency"),
        _opt("horizon", "float", None,
             f"time horizon (default {DEFAULT_HORIZON_LAM}/lam)"),
        _opt("points-per-period", "int", DEFAULT_PPP,
             "samples per oscillation period"),
    ] + _COMMON_OUT,
    "quantum-nqe": [
        _opt("alpha", "float", _REQUIRED, "fractional order in (0, 1]"),
        _opt("lam", "float", 1.0, "relaxation rate"),
        _opt("omega", "float", _REQUIRED, "oscillation frequency"),
        _opt("horizon", "float", None,
             f"time horizon (default {DEFAULT_HORIZON_LAM}/lam)"),
        _opt("points-per-period", "int", DEFAULT_PPP,
             "samples per oscillation period"),
    ] + _COMMON_OUT,
    "quantum-phase": [
        _opt("alpha-min", "float", 0.1, "smallest fractional order"),
        _opt("alpha-max", "float", 1.0, "largest fractional order"),
        _opt("n-alpha", "int", 33, "grid size along alpha"),
        _opt("ratio-min", "float", 0.5, "smallest omega/lambda"),
        _opt("ratio-max", "float", 20.0, "largest omega/lambda"),
        _opt("n-ratio", "int", 33, "grid size along omega/lambda"),
        _opt("horizon", "float", 200.0, "time horizon in units of 1/lambda"),
        _opt("points-per-period", "int", DEFAULT_PPP,
             "samples per oscillation period"),
        _opt("svg", "flag", False, "also write an SVG heatmap"),
    ] + _COMMON_OUT,
    "classical-traj": [
        _opt("model", "str", _REQUIRED, "memory construction",
             choices=tuple(MODELS)),
        _opt("k-file", "str", None,
             "3x3 rate matrix, one row per line (default: built-in)"),
        _opt("p0", "p0", _REQUIRED, "initial state, e.g. 1,0,0"),
        _opt("horizon", "float", _REQUIRED, "final time"),
        _opt("steps", "int", 201, "number of grid points"),
        _opt("gamma", "float", None, "memory rate (gme)"),
        _opt("alpha", "float", None, "fractional order (fractional)"),
        _opt("ntraj", "int", None, "ensemble size (erlang2-mc)"),
        _opt("seed", "int", None, "RNG seed (erlang2-mc)"),
        _opt("phase-split", "str", "fresh", "initial phase convention "
             "(erlang2)", choices=("fresh", "stationary")),
    ] + _COMMON_OUT,
    "classical-map": [
        _opt("model", "str", _REQUIRED, "memory construction",
             choices=tuple(MODELS)),
        _opt("metric", "str", _REQUIRED, "cell observable",
             choices=METRIC_CHOICES),
        _opt("k-file", "str", None, "3x3 rate matrix file"),
        _opt("res", "int", 40, "simplex lattice resolution"),
        _opt("horizon", "float", 20.0, "final time per cell"),
        _opt("steps", "int", 801, "grid points per cell"),
        _opt("gamma", "float", None, "memory rate (gme)"),
        _opt("alpha", "float", None, "fractional order (fractional)"),
        _opt("ntraj", "int", None, "ensemble size (erlang2-mc)"),
        _opt("seed", "int", None, "global RNG seed (erlang2-mc)"),
        _opt("svg", "flag", False, "also write an SVG heatmap"),
    ] + _COMMON_OUT,
    "alpha-sweep": [
        _opt("metric", "str", "n_dkl", "cell observable",
             choices=METRIC_CHOICES),
        _opt("k-file", "str", None, "3x3 rate matrix file"),
        _opt("alpha-min", "float", 0.1, "smallest fractional order"),
        _opt("alpha-max", "float", 1.0, "largest fractional order"),
        _opt("n-alpha", "int", 19, "number of alpha values"),
        _opt("p0", "p0list", None,
             "initial state a,b,c; repeatable (default 1,0,0)"),
        _opt("horizons", "floats", [10.0, 100.0, 1000.0],
             "comma-separated horizon list"),
        _opt("svg", "flag", False, "also write an SVG heatmap"),
    ] + _COMMON_OUT,
    "backflow": [
        _opt("input", "str", _REQUIRED,
             "CSV with a header line and columns t, I(t)"),
        _opt("epsilon", "float", 0.0, "minimum counted rise"),
    ] + _COMMON_OUT,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports through the shared error taxonomy."""

    def error(self, message):
        raise UsageError(message)


def _add_arguments(sub, schema):
    sub.add_argument("--config", help="JSON file with default parameters")
    for opt in schema:
        flag = "--" + opt["name"]
        if opt["kind"] == "flag":
            sub.add_argument(flag, action="store_const", const=True,
                             default=None, help=opt["help"])
        elif opt["kind"] == "p0list":
            sub.add_argument(flag, action="append", default=None,
                             help=opt["help"], metavar="A,B,C")
        else:
            sub.add_argument(flag, default=None, help=opt["help"],
                             choices=opt["choices"])


def _coerce(opt, value, source):
    name, kind = opt["name"], opt["kind"]
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            iv = int(value)
            if float(iv) != float(value):
                raise ValueError
            return iv
        if kind == "flag":
            if isinstance(value, bool):
                return value
            raise ValueError
        if kind == "p0":
            return _parse_p0(value)
        if kind == "p0list":
            if isinstance(value, str):
                return [_parse_p0(value)]
            value = list(value)
            if value and isinstance(value[0], (list, tuple, str)):
                return [_parse_p0(v) for v in value]
            return [_parse_p0(value)]
        if kind == "floats":
            if isinstance(value, str):
                value = value.split(",")
            return [float(v) for v in value]
        value = str(value)
        if opt["choices"] and value not in opt["choices"]:
            raise ValueError
        return value
    except (TypeError, ValueError):
        raise UsageError(
            f"{source} value for '{name}' is not a valid {kind}: {value!r}")


def _parse_p0(value):
    if isinstance(value, str):
        value = value.split(",")
    vals = [float(v) for v in value]
    if len(vals) != 3:
        raise ValueError
    return vals


def _resolve(command, schema, ns):
    """defaults < config file < explicit flags, with key validation."""
    out = {o["name"]: o["default"] for o in schema}
    by_name = {o["name"]: o for o in schema}
    if ns.config is not None:
        try:
            with open(ns.config) as fh:
                doc = json.load(fh)
        except OSError as err:
            raise OutputError(f"cannot read config {ns.config}: {err}")
        except json.JSONDecodeError as err:
            raise UsageError(f"config {ns.config} is not valid JSON: {err}")
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in doc.items():
            name = key.replace("_", "-")
            if name not in by_name:
                raise UsageError(
                    f"unknown config key '{key}' for {command}")
            out[name] = _coerce(by_name[name], val, "config")
    for opt in schema:
        given = getattr(ns, opt["name"].replace("-", "_"))
        if given is not None:
            out[opt["name"]] = _coerce(opt, given, "flag")
    missing = [n for n, v in out.items() if v is _REQUIRED]
    if missing:
        raise UsageError(f"{command} requires --" + ", --".join(missing))
    return out


def _outdir(cfg):
    path = cfg.get("outdir") or os.environ.get("BACKFLOW_OUTDIR") or "."
    if not os.path.isdir(path):
        raise OutputError(f"output directory does not exist: {path}")
    return path


def _write(path, text):
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as err:
        raise OutputError(f"cannot write {path}: {err}") from err


def _emit(command, cfg, t0, csv=None, payload=None, svg=None, extra=None):
    """Write the run's files and return their paths."""
    base = os.path.join(_outdir(cfg), command)
    files = []
    if csv is not None:
        _write(base + ".csv", csv)
        files.append(base + ".csv")
    if payload is not None:
        _write(base + ".json", payload)
        files.append(base + ".json")
    if svg is not None:
        _write(base + ".svg", svg)
        files.append(base + ".svg")
    meta = meta_json({"subcommand": command, **cfg},
                     wall_time=time.perf_counter() - t0, extra=extra)
    _write(base + ".meta.json", meta)
    files.append(base + ".meta.json")
    return files


def _load_generator(cfg):
    path = cfg.get("k-file")
    if path is None:
        return default_generator()
    try:
        K = np.loadtxt(path)
    except OSError as err:
        raise OutputError(f"cannot read k-file {path}: {err}")
    except ValueError as err:
        raise UsageError(f"k-file {path} is not a numeric matrix: {err}")
    return Generator3(K)


def _run_ml(cfg, t0):
    if cfg["batch"]:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise UsageError(f"batch line needs 'alpha x', got {line!r}")
            print(repr(float(ml_neg(float(parts[0]), float(parts[1])))))
        return
    if cfg["alpha"] is None or cfg["x"] is None:
        raise UsageError("ml requires --alpha and --x (or --batch)")
    print(repr(float(ml_neg(cfg["alpha"], cfg["x"]))))


def _quantum_params(cfg):
    params = QuantumParams(cfg["alpha"], cfg["lam"], cfg["omega"])
    horizon = cfg["horizon"]
    if horizon is None:
        horizon = DEFAULT_HORIZON_LAM / params.lam
    return params, horizon


def _run_quantum_traj(cfg, t0):
    params, horizon = _quantum_params(cfg)
    traj = sample_bqe(params, horizon, cfg["points-per-period"])
    files = _emit("quantum-traj", cfg, t0, csv=trajectory_csv(traj),
                  extra={"samples": len(traj)})
    print(f"{len(traj)} samples -> {files[0]}")


def _run_quantum_nqe(cfg, t0):
    params, horizon = _quantum_params(cfg)
    res, info = n_qe_result(params, horizon, cfg["points-per-period"])
    files = _emit("quantum-nqe", cfg, t0, payload=backflow_json(res),
                  extra=info)
    print(repr(res.n_i))


def _run_quantum_phase(cfg, t0):
    grid = quantum_phase_diagram(
        (cfg["alpha-min"], cfg["alpha-max"]),
        (cfg["ratio-min"], cfg["ratio-max"]),
        (cfg["n-alpha"], cfg["n-ratio"]),
        cfg["horizon"], cfg["points-per-period"])
    svg = phase_grid_svg(grid) if cfg["svg"] else None
    files = _emit("quantum-phase", cfg, t0, csv=phase_grid_csv(grid),
                  svg=svg, extra={"grid_meta": grid.meta})
    print(f"{grid.values.shape[0]}x{grid.values.shape[1]} grid -> {files[0]}")


def _classical_trajectory(cfg, gen, grid_t):
    kind = MODELS[cfg["model"]]
    p0 = np.array(cfg["p0"])
    if kind == "markov":
        return markov_trajectory(gen, p0, grid_t)
    if kind == "gme_exponential":
        mem = MemoryConfig(kind, gamma=cfg["gamma"])
        return gme_exponential_propagate(gen, mem.gamma, p0, grid_t)
    if kind == "erlang2_embedded":
        return erlang2_propagate(gen, p0, grid_t,
                                 phase_split=cfg["phase-split"])
    if kind == "erlang2_montecarlo":
        mem = MemoryConfig(kind, n_traj=cfg["ntraj"], seed=cfg["seed"])
        return erlang2_monte_carlo(gen, p0, grid_t, mem.n_traj, mem.seed)
    mem = MemoryConfig(kind, alpha=cfg["alpha"])
    return fractional_propagate(gen, mem.alpha, p0, grid_t)


def _run_classical_traj(cfg, t0):
    gen = _load_generator(cfg)
    if cfg["steps"] < 2:
        raise UsageError("steps must be >= 2")
    grid_t = np.linspace(0.0, cfg["horizon"], cfg["steps"])
    traj = _classical_trajectory(cfg, gen, grid_t)
    files = _emit("classical-traj", cfg, t0, csv=trajectory_csv(traj),
                  extra={"stationary": gen.pi.tolist()})
    print(f"{len(grid_t)} samples -> {files[0]}")


def _memory_config(cfg):
    kind = MODELS[cfg["model"]]
    return MemoryConfig(kind, gamma=cfg["gamma"], alpha=cfg["alpha"],
                        n_traj=cfg["ntraj"], seed=cfg["seed"])


def _run_classical_map(cfg, t0):
    gen = _load_generator(cfg)
    grid = simplex_map(gen, _memory_config(cfg), cfg["metric"],
                       res=cfg["res"], horizon=cfg["horizon"],
                       steps=cfg["steps"])
    svg = phase_grid_svg(grid) if cfg["svg"] else None
    files = _emit("classical-map", cfg, t0, csv=phase_grid_csv(grid),
                  svg=svg, extra={"grid_meta": grid.meta})
    print(f"res {cfg['res']} simplex map -> {files[0]}")


def _run_alpha_sweep(cfg, t0):
    gen = _load_generator(cfg)
    if cfg["n-alpha"] < 2:
        raise UsageError("n-alpha must be >= 2")
    alphas = np.linspace(cfg["alpha-min"], cfg["alpha-max"], cfg["n-alpha"])
    p0s = cfg["p0"] if cfg["p0"] is not None else [[1.0, 0.0, 0.0]]
    grid = classical_alpha_sweep(gen, alphas, [np.array(p) for p in p0s],
                                 cfg["metric"], cfg["horizons"])
    svg = phase_grid_svg(grid) if cfg["svg"] else None
    meta = {k: v for k, v in grid.meta.items() if k != "growth"}
    files = _emit("alpha-sweep", cfg, t0, csv=phase_grid_csv(grid), svg=svg,
                  extra={"grid_meta": meta, "growth": grid.meta["growth"]})
    print(f"{len(alphas)} alpha values -> {files[0]}")


def _run_backflow(cfg, t0):
    try:
        with open(cfg["input"]) as fh:
            text = fh.read()
    except OSError as err:
        raise OutputError(f"cannot read {cfg['input']}: {err}")
    times, columns = read_trajectory_csv(text)
    res = backflow_functional(Trajectory(times, columns[:, 0]),
                              epsilon=cfg["epsilon"])
    _emit("backflow", cfg, t0, payload=backflow_json(res),
          extra={"samples": times.shape[0]})
    print(repr(res.n_i))


_RUNNERS = {
    "ml": _run_ml,
    "quantum-traj": _run_quantum_traj,
    "quantum-nqe": _run_quantum_nqe,
    "quantum-phase": _run_quantum_phase,
    "classical-traj": _run_classical_traj,
    "classical-map": _run_classical_map,
    "alpha-sweep": _run_alpha_sweep,
    "backflow": _run_backflow,
}


def build_parser():
    parser = _Parser(prog="backflow",
                     description="Information-backflow diagnostics for "
                                 "fractional and non-Markovian models.")
    parser.add_argument("--version", action="version",
                        version=f"backflow {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, schema in SCHEMAS.items():
        _add_arguments(sub.add_parser(name, help=f"run {name}"), schema)
    return parser


def main(argv=None):
    t0 = time.perf_counter()
    try:
        ns = build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required (see --help)")
        cfg = _resolve(ns.command, SCHEMAS[ns.command], ns)
        _RUNNERS[ns.command](cfg, t0)
        return 0
    except BackflowError as err:
        print(f"{err.category}: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
