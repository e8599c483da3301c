"""Command-line entry point: ``xsqueeze <command> [flags]``.

Every command prints a JSON envelope (effective config, tool version, wall
time, seeding scheme, payload) to stdout.  Tables and grids go to CSV files.
Effective configuration is ``defaults < --config file < command-line flags``;
the ``config`` block of an envelope can be fed back through ``--config`` to
reproduce its payload.

Exit status is 0 on success (including unconverged optimizations, which are
flagged in the payload), 2 on invalid configuration and 1 on a numerical
failure; in both failure cases stdout carries ``{"error": {...}}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dicke import build_system, coherent_state
from .errors import DivergentSensitivityError, XSqueezeError
from .extreme import solve_extreme
from .husimi import husimi_grid, write_csv
from .kernels import BACKEND
from .metrology import (DEFAULT_GAMMA, LossModel, contrast_loss, corrected_xi2,
                        gain_db, orient_for_readout, ramsey_sensitivity,
                        ramsey_signal, ramsey_slope, wineland_xi2)
from .optimize import OptimizationConfig, optimize
from .pulses import PulseSequence, initial_css, propagate, propagate_snapshots
from .scaling import (OAT_SCAN_POINTS, SweepTable, default_n_grid, fit_table,
                      sweep_extreme_scaling, sweep_gain_vs_shear,
                      sweep_oat_scaling)

SEEDING = ("restart k draws from numpy PCG64 seeded by "
           "SeedSequence(seed, spawn_key=(k,)); restart 0 is a fixed "
           "deterministic start")

SWEEP_KINDS = ("extreme-scaling", "oat-scaling", "gain-vs-shear")
STATE_KINDS = ("css", "extreme", "sequence")

DEFAULTS = {
    "extreme-state": {"atoms": 60, "contrast": 0.9, "tolerance": 1e-10,
                      "husimi": None, "out": None},
    "optimize": {"atoms": 60, "contrast": 0.9, "pulses": 4, "q_tilde": None,
                 "gamma": DEFAULT_GAMMA, "seed": 0, "starts": 20, "max_iter": 3000,
                 "grad_tol": 1e-9, "husimi": None, "out": None},
    "sweep": {"kind": "extreme-scaling", "atoms": None, "contrast": None, "pulses": 4,
              "q_tilde": None, "gamma": DEFAULT_GAMMA, "seed": 0, "starts": 20,
              "max_iter": 3000, "grad_tol": 1e-9, "tolerance": 1e-10,
              "scan_points": OAT_SCAN_POINTS, "jobs": 1, "out": None, "resume": None},
    "ramsey": {"state": "extreme", "atoms": 60, "contrast": 0.9, "params": None,
               "theta": 0.5 * math.pi, "phi": 0.0, "readout": "x", "orient": True,
               "phases": [0.0], "out": None},
    "husimi": {"state": "extreme", "atoms": 60, "contrast": 0.9, "params": None,
               "theta": 0.5 * math.pi, "phi": 0.0, "husimi": "64x128", "out": None},
}

SWEEP_DEFAULT_ATOMS = {
    "extreme-scaling": default_n_grid(20, 200, 8),
    "oat-scaling": default_n_grid(20, 300, 8),
    "gain-vs-shear": [50, 100, 200, 350],
}
SWEEP_DEFAULT_CONTRAST = {"extreme-scaling": 0.5, "oat-scaling": None, "gain-vs-shear": 0.9}


class ValidationError(Exception):
    """Invalid command line or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def parse_int_list(value) -> list[int]:
    """``"20,50"``, ``"geom:20:200:8"`` (log-spaced even N) or a list."""
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    if isinstance(value, int):
        return [value]
    text = str(value).strip()
    if text.startswith("geom:"):
        lo, hi, count = (int(v) for v in text[5:].split(":"))
        return default_n_grid(lo, hi, count)
    return [int(v) for v in text.split(",") if v.strip()]


def parse_float_list(value) -> list[float]:
    """``"0.1,0.5"``, ``"lin:0.1:1.5:15"`` or a list."""
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, (int, float)):
        return [float(value)]
    text = str(value).strip()
    if text.startswith("lin:"):
        lo, hi, count = text[4:].split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(count))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_grid_size(value) -> tuple[int, int]:
    if isinstance(value, (list, tuple)):
        n_theta, n_phi = (int(v) for v in value)
    else:
        parts = str(value).lower().split("x")
        if len(parts) != 2:
            raise ValidationError(f"grid size must look like 64x128, got {value!r}")
        n_theta, n_phi = int(parts[0]), int(parts[1])
    if n_theta < 2 or n_phi < 2:
        raise ValidationError("grid dimensions must be >= 2")
    return n_theta, n_phi


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {value!r}")


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def atomic_write(path, writer) -> None:
    """Write through ``writer(fh)`` into a temp file next to ``path``, then rename."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer(fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _sibling(out, suffix: str) -> Path:
    out = Path(out)
    return out.with_name(out.stem + suffix)


def _require_out(cfg, why):
    if not cfg["out"]:
        raise ValidationError(f"--out is required {why}")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def load_config_file(path) -> dict:
    """JSON object of option values; a full envelope is accepted too."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    if not isinstance(data, dict):
        raise ValidationError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def effective_config(command: str, file_cfg: dict, flags: dict) -> dict:
    base = dict(DEFAULTS[command])
    unknown = sorted(set(file_cfg) - set(base))
    if unknown:
        raise ValidationError(f"unknown config keys for {command}: {unknown}")
    base.update(file_cfg)
    base.update(flags)
    return base


def _check(cond, message):
    if not cond:
        raise ValidationError(message)


def _validate_atoms(n, minimum=2):
    _check(isinstance(n, int) and n >= minimum, f"atoms must be an integer >= {minimum}, got {n!r}")


def _validate_contrast(c):
    _check(c is not None and 0.0 < c < 1.0, f"contrast must lie in (0, 1), got {c!r}")


def normalize(command: str, cfg: dict) -> dict:
    """Coerce and validate; the result is what gets echoed in the envelope."""
    cfg = dict(cfg)
    try:
        if command == "sweep":
            _check(cfg["kind"] in SWEEP_KINDS, f"kind must be one of {SWEEP_KINDS}")
            kind = cfg["kind"]
            if cfg["atoms"] is None:
                cfg["atoms"] = SWEEP_DEFAULT_ATOMS[kind]
            cfg["atoms"] = parse_int_list(cfg["atoms"])
            _check(len(cfg["atoms"]) > 0, "atom grid must be non-empty")
            for n in cfg["atoms"]:
                _validate_atoms(n, 4 if kind == "oat-scaling" else 2)
            if cfg["contrast"] is None:
                cfg["contrast"] = SWEEP_DEFAULT_CONTRAST[kind]
            if kind != "oat-scaling":
                cfg["contrast"] = float(cfg["contrast"])
                _validate_contrast(cfg["contrast"])
            if kind == "gain-vs-shear":
                if cfg["q_tilde"] is None:
                    cfg["q_tilde"] = [round(v, 12) for v in np.linspace(0.1, 1.5, 15)]
                cfg["q_tilde"] = parse_float_list(cfg["q_tilde"])
                q = cfg["q_tilde"]
                _check(len(q) > 0, "q_tilde grid must be non-empty")
                _check(all(v > 0 for v in q) and all(b > a for a, b in zip(q, q[1:])),
                       "q_tilde grid must be positive and strictly ascending")
            cfg["jobs"] = int(cfg["jobs"])
            _check(cfg["jobs"] >= 1, "jobs must be >= 1")
            cfg["scan_points"] = int(cfg["scan_points"])
            _check(cfg["scan_points"] >= 3, "scan_points must be >= 3")
        elif command in ("ramsey", "husimi"):
            _check(cfg["state"] in STATE_KINDS, f"state must be one of {STATE_KINDS}")
        if command != "sweep":
            cfg["atoms"] = int(cfg["atoms"])
            _validate_atoms(cfg["atoms"])
        if "contrast" in cfg and command != "sweep":
            cfg["contrast"] = float(cfg["contrast"])
            if command in ("extreme-state", "optimize") or cfg.get("state") == "extreme":
                _validate_contrast(cfg["contrast"])
        if "pulses" in cfg:
            cfg["pulses"] = int(cfg["pulses"])
            _check(cfg["pulses"] >= 2 and cfg["pulses"] % 2 == 0,
                   f"pulses must be even and >= 2, got {cfg['pulses']}")
        if command == "optimize" and cfg["q_tilde"] is not None:
            cfg["q_tilde"] = float(cfg["q_tilde"])
            _check(cfg["q_tilde"] > 0, "q_tilde must be positive")
        for key in ("gamma", "tolerance", "grad_tol", "theta", "phi"):
            if key in cfg:
                cfg[key] = float(cfg[key])
        if "gamma" in cfg:
            _check(cfg["gamma"] >= 0, "gamma must be non-negative")
        for key in ("tolerance", "grad_tol"):
            if key in cfg:
                _check(cfg[key] > 0, f"{key} must be positive")
        for key in ("seed", "starts", "max_iter"):
            if key in cfg:
                cfg[key] = int(cfg[key])
        if "seed" in cfg:
            _check(0 <= cfg["seed"] < 2 ** 64, "seed must be a 64-bit unsigned integer")
        if "starts" in cfg:
            _check(cfg["starts"] >= 1, "starts must be >= 1")
        if "max_iter" in cfg:
            _check(cfg["max_iter"] >= 1, "max_iter must be >= 1")
        if cfg.get("husimi") is not None:
            cfg["husimi"] = "%dx%d" % parse_grid_size(cfg["husimi"])
        if command == "ramsey":
            _check(cfg["readout"] in ("x", "y"), "readout must be x or y")
            cfg["orient"] = _bool(cfg["orient"])
            cfg["phases"] = parse_float_list(cfg["phases"])
            _check(len(cfg["phases"]) > 0, "phase grid must be non-empty")
        if cfg.get("state") == "sequence":
            _check(cfg["params"] is not None, "state=sequence needs --params")
            cfg["params"] = parse_float_list(cfg["params"])
            _check(len(cfg["params"]) >= 2 and len(cfg["params"]) % 2 == 0,
                   "params must hold an even number of values")
        elif "params" in cfg and cfg["params"] is not None:
            cfg["params"] = parse_float_list(cfg["params"])
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc
    return cfg


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _extreme_summary(sol) -> dict:
    return {"n_atoms": sol.system.n_atoms, "omega_over_chi": sol.omega_over_chi,
            "achieved_contrast": sol.achieved_contrast, "xi2": sol.xi2,
            "gain_db": gain_db(sol.xi2), "ground_energy": sol.ground_energy}


def _write_husimi(state, size, path) -> dict:
    n_theta, n_phi = parse_grid_size(size)
    grid = husimi_grid(state, n_theta, n_phi)
    atomic_write(path, lambda fh: write_csv(grid, fh))
    return {"path": str(path), "n_theta": n_theta, "n_phi": n_phi,
            "rows": n_theta * n_phi, "normalization": grid.normalization()}


def cmd_extreme_state(cfg) -> dict:
    if cfg["husimi"]:
        _require_out(cfg, "with --husimi")
    system = build_system(cfg["atoms"])
    sol = solve_extreme(system, cfg["contrast"], cfg["tolerance"])
    payload = {"extreme_state": _extreme_summary(sol)}
    if cfg["husimi"]:
        payload["husimi"] = _write_husimi(sol.state, cfg["husimi"],
                                          _sibling(cfg["out"], ".husimi.csv"))
    return payload


def _optimization_config(cfg, fixed=None) -> OptimizationConfig:
    return OptimizationConfig(n_pulses=cfg["pulses"], max_iterations=cfg["max_iter"],
                              gradient_tolerance=cfg["grad_tol"], n_starts=cfg["starts"],
                              seed=cfg["seed"], fixed_q_tilde=fixed)


def cmd_optimize(cfg) -> dict:
    if cfg["husimi"]:
        _require_out(cfg, "with --husimi")
    system = build_system(cfg["atoms"])
    target = solve_extreme(system, cfg["contrast"])
    res = optimize(system, target, _optimization_config(cfg, cfg["q_tilde"]))
    c_sc = contrast_loss(LossModel(cfg["gamma"]), res.q_tilde)
    xi2c = corrected_xi2(res.xi2_generated, c_sc)
    payload = {
        "target": _extreme_summary(target),
        "sequence": res.to_dict(),
        "gain_db": gain_db(res.xi2_generated),
        "loss": {"gamma": cfg["gamma"], "q_tilde": res.q_tilde, "contrast_factor": c_sc,
                 "xi2_corrected": xi2c, "gain_corrected_db": gain_db(xi2c)},
    }
    if cfg["husimi"]:
        snaps = propagate_snapshots(initial_css(system), res.sequence)
        payload["husimi_snapshots"] = [
            dict(_write_husimi(s, cfg["husimi"], _sibling(cfg["out"], f".pulse{k}.husimi.csv")),
                 after_pulse=k)
            for k, s in enumerate(snaps)]
    return payload


def _fit_dict(fit) -> dict:
    return {"a": fit.a, "b": fit.b, "r_squared": fit.r_squared}


def cmd_sweep(cfg) -> dict:
    kind = cfg["kind"]
    resume = None
    if cfg["resume"]:
        if kind != "gain-vs-shear":
            raise ValidationError("--resume applies to gain-vs-shear sweeps only")
        try:
            resume = SweepTable.from_csv(cfg["resume"])
        except (OSError, ValueError, KeyError) as exc:
            raise ValidationError(f"cannot read resume file {cfg['resume']}: {exc}") from exc

    if kind == "extreme-scaling":
        table = sweep_extreme_scaling(cfg["atoms"], cfg["contrast"], cfg["tolerance"])
        extra = {"fit": _fit_dict(fit_table(table))} if len(table.rows) >= 3 else {}
    elif kind == "oat-scaling":
        table = sweep_oat_scaling(cfg["atoms"], cfg["scan_points"])
        extra = {"fit": _fit_dict(fit_table(table))} if len(table.rows) >= 3 else {}
    else:
        checkpoint = SweepTable(list(resume.rows) if resume else [])

        def on_row(row):
            if row.key not in checkpoint.keys():
                checkpoint.add(row)
            if cfg["out"]:
                atomic_write(cfg["out"], checkpoint.write_csv)

        result = sweep_gain_vs_shear(
            cfg["atoms"], cfg["q_tilde"], contrast=cfg["contrast"], n_pulses=cfg["pulses"],
            config=_optimization_config(cfg), gamma=cfg["gamma"], jobs=cfg["jobs"],
            resume=resume, on_row=on_row)
        table = result.table
        reused = len(table.keys() & (resume.keys() if resume else set()))
        extra = {
            "peaks": {str(n): {"q_tilde": p.q_tilde, "gain_db": p.gain_db, "interior": p.interior}
                      for n, p in result.peaks.items()},
            "exponents": {repr(q): _fit_dict(f) for q, f in result.exponents.items()},
            "rows_reused": reused,
            "rows_computed": len(table.rows) - reused,
        }

    table.sort()
    payload = {"kind": kind, "rows": len(table.rows), **extra}
    if cfg["out"]:
        atomic_write(cfg["out"], table.write_csv)
        payload["table"] = str(cfg["out"])
    else:
        payload["table"] = table.to_dict()["rows"]
    return payload


def _prepare_state(cfg):
    system = build_system(cfg["atoms"])
    if cfg["state"] == "css":
        return coherent_state(system, cfg["theta"], cfg["phi"])
    if cfg["state"] == "extreme":
        return solve_extreme(system, cfg["contrast"]).state
    return propagate(initial_css(system), PulseSequence.from_params(cfg["params"]))


def cmd_ramsey(cfg) -> dict:
    state = _prepare_state(cfg)
    axis = cfg["readout"]
    if cfg["orient"]:
        state = orient_for_readout(state, axis)
    n = state.n_atoms
    xi = math.sqrt(wineland_xi2(state).xi2)
    rows = []
    for phase in cfg["phases"]:
        row = {"phase": phase, "signal": ramsey_signal(state, phase, axis),
               "slope": ramsey_slope(state, phase, axis)}
        try:
            dphi = ramsey_sensitivity(state, phase, axis)
            row.update(delta_phi=dphi, delta_phi_sqrt_n=dphi * math.sqrt(n), divergent=False)
        except DivergentSensitivityError:
            row.update(delta_phi=None, delta_phi_sqrt_n=None, divergent=True)
        rows.append(row)
    try:
        at_zero = ramsey_sensitivity(state, 0.0, axis) * math.sqrt(n)
        residual = abs(at_zero / xi - 1.0)
    except DivergentSensitivityError:
        at_zero, residual = None, None
    payload = {"n_atoms": n, "readout_axis": axis, "xi": xi, "xi2": xi * xi,
               "delta_phi_sqrt_n_at_zero": at_zero, "xi_consistency_residual": residual,
               "rows": rows}
    if cfg["out"]:
        def write(fh):
            w = csv.writer(fh)
            cols = ["phase", "signal", "slope", "delta_phi", "delta_phi_sqrt_n", "divergent"]
            w.writerow(cols)
            for r in rows:
                w.writerow(["" if r[c] is None else (repr(float(r[c])) if c != "divergent"
                                                      else str(r[c]).lower()) for c in cols])
        path = _sibling(cfg["out"], ".csv") if Path(cfg["out"]).suffix != ".csv" else cfg["out"]
        atomic_write(path, write)
        payload["table"] = str(path)
    return payload


def cmd_husimi(cfg) -> dict:
    _require_out(cfg, "for the husimi CSV")
    state = _prepare_state(cfg)
    return {"state": cfg["state"], "husimi": _write_husimi(state, cfg["husimi"], cfg["out"])}


COMMANDS = {
    "extreme-state": cmd_extreme_state,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "ramsey": cmd_ramsey,
    "husimi": cmd_husimi,
}

# commands whose --out is the JSON envelope itself; the others write their
# table or grid to --out and the envelope to <stem>.envelope.json
ENVELOPE_OUT = ("extreme-state", "optimize")


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="xsqueeze", description=__doc__.splitlines()[0],
                     argument_default=S)
    parser.add_argument("--version", action="version", version=f"xsqueeze {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(p, *names):
        p.add_argument("--config", help="JSON file of option values (or a previous envelope)")
        p.add_argument("--out", help="output path")
        opts = {
            "atoms": dict(help="atom number N (sweep: list '20,50' or 'geom:lo:hi:count')"),
            "contrast": dict(type=float, help="target <S_x>/S"),
            "pulses": dict(type=int, help="number of pulses n (even)"),
            "q_tilde": dict(help="normalized shear sqrt(N) sum|Q| (sweep: list or 'lin:lo:hi:count')"),
            "gamma": dict(type=float, help=f"scattering loss rate (default {DEFAULT_GAMMA})"),
            "seed": dict(type=int, help="64-bit seed for the optimizer restarts"),
            "starts": dict(type=int, help="number of optimizer restarts"),
            "max_iter": dict(type=int, help="L-BFGS-B iteration cap per restart"),
            "grad_tol": dict(type=float, help="L-BFGS-B projected-gradient tolerance"),
            "tolerance": dict(type=float, help="contrast tolerance of the extreme solver"),
            "jobs": dict(type=int, help="worker processes for sweeps"),
            "husimi": dict(help="Husimi grid NTHETAxNPHI, e.g. 64x128"),
            "resume": dict(help="partially written sweep CSV to continue"),
            "state": dict(choices=STATE_KINDS, help="input state"),
            "params": dict(help="sequence parameters Q1,mu2,Q3,mu4,... for state=sequence"),
            "theta": dict(type=float, help="CSS polar angle"),
            "phi": dict(type=float, help="CSS azimuth"),
            "phases": dict(help="phase grid, list or 'lin:lo:hi:count'"),
            "readout": dict(choices=("x", "y"), help="axis of the closing pi/2 pulse"),
            "orient": dict(help="rotate the state to the optimal operating point (true/false)"),
            "scan_points": dict(type=int, help="grid points of the OAT shear scan"),
        }
        for name in names:
            p.add_argument("--" + name.replace("_", "-"), dest=name, **opts[name])

    p = sub.add_parser("extreme-state", help="solve for an extreme squeezed state",
                       argument_default=S)
    common(p, "atoms", "contrast", "tolerance", "husimi")
    p = sub.add_parser("optimize", help="optimize a pulse sequence towards an extreme state",
                       argument_default=S)
    common(p, "atoms", "contrast", "pulses", "q_tilde", "gamma", "seed", "starts",
           "max_iter", "grad_tol", "husimi")
    p = sub.add_parser("sweep", help="scaling and gain sweeps", argument_default=S)
    p.add_argument("--kind", choices=SWEEP_KINDS)
    common(p, "atoms", "contrast", "pulses", "q_tilde", "gamma", "seed", "starts",
           "max_iter", "grad_tol", "tolerance", "scan_points", "jobs", "resume")
    p = sub.add_parser("ramsey", help="Ramsey phase sensitivity over a phase grid",
                       argument_default=S)
    common(p, "state", "atoms", "contrast", "params", "theta", "phi", "phases",
           "readout", "orient")
    p = sub.add_parser("husimi", help="Husimi-Q grid of a state", argument_default=S)
    common(p, "state", "atoms", "contrast", "params", "theta", "phi", "husimi")
    return parser


def _error(kind: str, message: str, code: int) -> int:
    sys.stdout.write(dumps({"error": {"type": kind, "message": message, "exit_code": code}}))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = vars(parser.parse_args(argv))
        command = ns.pop("command")
        config_path = ns.pop("config", None)
        file_cfg = load_config_file(config_path) if config_path else {}
        cfg = normalize(command, effective_config(command, file_cfg, ns))
    except ValidationError as exc:
        return _error("ValidationError", str(exc), 2)

    start = time.perf_counter()
    try:
        payload = COMMANDS[command](cfg)
    except ValidationError as exc:
        return _error("ValidationError", str(exc), 2)
    except (XSqueezeError, ValueError, ArithmeticError) as exc:
        return _error(type(exc).__name__, str(exc), 1)
    envelope = {
        "tool": "xsqueeze",
        "version": __version__,
        "backend": BACKEND,
        "command": command,
        "config": cfg,
        "seeding": SEEDING,
        "duration_s": time.perf_counter() - start,
        "payload": payload,
    }
    text = dumps(envelope)
    if cfg.get("out"):
        if command in ENVELOPE_OUT:
            atomic_write(cfg["out"], lambda fh: fh.write(text))
        else:
            atomic_write(_sibling(cfg["out"], ".envelope.json"), lambda fh: fh.write(text))
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
