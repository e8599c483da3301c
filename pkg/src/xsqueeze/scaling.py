"""Sweeps over atom number and shear, and power-law fits of the results."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .dicke import build_system
from .extreme import solve_extreme
from .metrology import (LossModel, contrast_loss, corrected_xi2, gain_db,
                        wineland_xi2)
from .optimize import OptimizationConfig, optimize_fixed_shear
from .pulses import PulseSequence, infidelity, initial_css, propagate

OAT_SCAN_POINTS = 2000


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    n_atoms: int
    contrast_target: Optional[float]
    q_tilde: Optional[float]
    epsilon: Optional[float]
    xi2: float
    xi2_corrected: Optional[float]
    gain_db: float
    omega_over_chi: Optional[float]
    params: tuple = ()

    @property
    def key(self):
        return (self.n_atoms, self.contrast_target, self.q_tilde)


_FLOAT_OR_NONE = ("contrast_target", "q_tilde", "epsilon", "xi2_corrected", "omega_over_chi")
COLUMNS = [f.name for f in fields(SweepRow)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ";".join(repr(float(v)) for v in value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _parse_row(record: dict) -> SweepRow:
    kwargs = {}
    for name in COLUMNS:
        raw = record[name]
        if name == "n_atoms":
            kwargs[name] = int(raw)
        elif name == "params":
            kwargs[name] = tuple(float(v) for v in raw.split(";")) if raw else ()
        elif name in _FLOAT_OR_NONE:
            kwargs[name] = float(raw) if raw != "" else None
        else:
            kwargs[name] = float(raw)
    return SweepRow(**kwargs)


@dataclass
class SweepTable:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, row: SweepRow) -> None:
        if row.xi2 <= 0:
            raise ValueError("xi2 must be positive")
        if row.key in self.keys():
            raise ValueError(f"duplicate row key {row.key}")
        self.rows.append(row)

    def keys(self) -> set:
        return {r.key for r in self.rows}

    def sort(self) -> None:
        self.rows.sort(key=lambda r: (r.n_atoms,
                                      -1.0 if r.contrast_target is None else r.contrast_target,
                                      -1.0 if r.q_tilde is None else r.q_tilde))

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def select(self, **conditions) -> list:
        return [r for r in self.rows
                if all(getattr(r, k) == v for k, v in conditions.items())]

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for r in self.rows:
            writer.writerow([_fmt(getattr(r, c)) for c in COLUMNS])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            self.write_csv(fh)

    @classmethod
    def from_csv(cls, path) -> "SweepTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = set(COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            table = cls()
            for record in reader:
                table.add(_parse_row(record))
        return table

    def to_dict(self) -> dict:
        return {"metadata": self.metadata,
                "rows": [dict(asdict(r), params=list(r.params)) for r in self.rows]}


# ---------------------------------------------------------------------------
# power laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerLawFit:
    """y = a * N**(-b), fitted by least squares in log-log space."""

    a: float
    b: float
    r_squared: float

    def __call__(self, n):
        return self.a * np.asarray(n, dtype=float) ** (-self.b)


def power_law_fit(points) -> PowerLawFit:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (N, y) points")
    n, y = pts[:, 0], pts[:, 1]
    if np.any(n < 1):
        raise ValueError("N values must be >= 1")
    if np.any(y <= 0):
        raise ValueError("y values must be positive")
    lx, ly = np.log(n), np.log(y)
    design = np.column_stack([np.ones_like(lx), lx])
    (intercept, slope), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, float(np.sum(ly ** 2))) else 1.0 - ss_res / ss_tot
    return PowerLawFit(a=float(np.exp(intercept)), b=float(-slope),
                       r_squared=float(min(max(r2, 0.0), 1.0)))


def default_n_grid(lo: int = 20, hi: int = 200, count: int = 8) -> list[int]:
    """``count`` log-spaced even integers in [lo, hi].

    Even N keeps S integer: for half-integer S the ground state at vanishing
    Omega/chi already has contrast (2S+1)/(4S) > 1/2, so low contrasts are out
    of reach.
    """
    return sorted({2 * int(round(v / 2)) for v in np.geomspace(lo, hi, count)})


def fit_table(table: SweepTable, column: str = "xi2", **conditions) -> PowerLawFit:
    rows = table.select(**conditions) if conditions else table.rows
    return power_law_fit([(r.n_atoms, getattr(r, column)) for r in rows])


# ---------------------------------------------------------------------------
# extreme states
# ---------------------------------------------------------------------------

def sweep_extreme_scaling(n_list, contrast: float, tolerance: float = 1e-10) -> SweepTable:
    if any(int(n) < 2 for n in n_list):
        raise ValueError("all N must be >= 2")
    table = SweepTable(metadata={"kind": "extreme-scaling", "contrast": contrast})
    for n in sorted(int(n) for n in n_list):
        sol = solve_extreme(build_system(n), contrast, tolerance)
        table.add(SweepRow(n_atoms=n, contrast_target=contrast, q_tilde=None, epsilon=None,
                           xi2=sol.xi2, xi2_corrected=None, gain_db=gain_db(sol.xi2),
                           omega_over_chi=sol.omega_over_chi))
    return table


# ---------------------------------------------------------------------------
# one-axis twisting baseline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OatScan:
    shear: float
    xi2: float
    interior: bool
    grid: np.ndarray
    xi2_grid: np.ndarray


def oat_xi2(system, shear: float) -> float:
    """Wineland parameter of exp(-i Q S_z^2) applied to the x-polarized CSS."""
    state = propagate(initial_css(system), PulseSequence((shear,), (0.0,)))
    return wineland_xi2(state).xi2


def oat_scan(system, n_points: int = OAT_SCAN_POINTS, q_max: Optional[float] = None) -> OatScan:
    """Grid scan of Q over (0, 3 N^(-2/3)] followed by golden-section refinement."""
    if q_max is None:
        q_max = 3.0 * system.n_atoms ** (-2.0 / 3.0)
    grid = np.linspace(q_max / n_points, q_max, n_points)
    values = np.array([oat_xi2(system, q) for q in grid])
    i = int(np.argmin(values))
    interior = 0 < i < n_points - 1
    if not interior:
        return OatScan(float(grid[i]), float(values[i]), False, grid, values)
    res = minimize_scalar(lambda q: oat_xi2(system, q), method="golden",
                          bracket=(grid[i - 1], grid[i], grid[i + 1]), tol=1e-10)
    q_best, xi2_best = (float(res.x), float(res.fun)) if res.fun <= values[i] else (float(grid[i]), float(values[i]))
    return OatScan(q_best, xi2_best, True, grid, values)


def sweep_oat_scaling(n_list, n_points: int = OAT_SCAN_POINTS) -> SweepTable:
    if any(int(n) < 4 for n in n_list):
        raise ValueError("all N must be >= 4")
    table = SweepTable(metadata={"kind": "oat-scaling", "scan_points": n_points})
    for n in sorted(int(n) for n in n_list):
        scan = oat_scan(build_system(n), n_points)
        table.add(SweepRow(n_atoms=n, contrast_target=None, q_tilde=None, epsilon=None,
                           xi2=scan.xi2, xi2_corrected=None, gain_db=gain_db(scan.xi2),
                           omega_over_chi=None, params=(scan.shear, 0.0)))
    return table


# ---------------------------------------------------------------------------
# corrected gain versus normalized shear
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _target(n: int, contrast: float):
    return solve_extreme(build_system(n), contrast)


def gain_vs_shear_row(n: int, q_tilde: float, contrast: float,
                      config: OptimizationConfig, gamma: float) -> SweepRow:
    system = build_system(n)
    cfg = OptimizationConfig(**dict(config.to_dict(), fixed_q_tilde=float(q_tilde)))
    res = optimize_fixed_shear(system, _target(n, contrast), cfg)
    c_sc = contrast_loss(LossModel(gamma), q_tilde)
    xi2c = corrected_xi2(res.xi2_generated, c_sc)
    return SweepRow(n_atoms=n, contrast_target=contrast, q_tilde=float(q_tilde),
                    epsilon=res.epsilon, xi2=res.xi2_generated, xi2_corrected=xi2c,
                    gain_db=gain_db(xi2c), omega_over_chi=_target(n, contrast).omega_over_chi,
                    params=tuple(res.sequence.params))


def _row_task(args):
    return gain_vs_shear_row(*args)


@dataclass(frozen=True)
class PeakEstimate:
    q_tilde: float
    gain_db: float
    index: int
    interior: bool


def peak_location(q_grid, gains) -> PeakEstimate:
    """Discrete argmax refined by the vertex of the parabola through its neighbours."""
    q = np.asarray(q_grid, dtype=float)
    g = np.asarray(gains, dtype=float)
    i = int(np.argmax(g))
    if i == 0 or i == len(g) - 1:
        return PeakEstimate(float(q[i]), float(g[i]), i, False)
    c2, c1, c0 = np.polyfit(q[i - 1:i + 2], g[i - 1:i + 2], 2)
    if c2 >= 0:  # flat triple
        return PeakEstimate(float(q[i]), float(g[i]), i, True)
    qv = -c1 / (2 * c2)
    return PeakEstimate(float(qv), float(c0 + c1 * qv + c2 * qv * qv), i, True)


@dataclass
class GainShearResult:
    table: SweepTable
    peaks: dict
    exponents: dict


def sweep_gain_vs_shear(n_list, q_tilde_grid, contrast: float = 0.9, n_pulses: int = 4,
                        config: Optional[OptimizationConfig] = None,
                        gamma: float = LossModel().gamma, jobs: int = 1,
                        resume: Optional[SweepTable] = None,
                        on_row: Optional[Callable[[SweepRow], None]] = None) -> GainShearResult:
    """Fixed-shear optimization on every (N, Q_tilde) pair, plus peak and exponent analysis.

    Rows already present in ``resume`` (same key) are reused instead of
    recomputed.  With ``jobs > 1`` rows run in worker processes; the table is
    assembled in grid order either way.  ``on_row`` is called with every
    freshly computed row as soon as it is available (used for checkpointing).
    """
    q_grid = [float(q) for q in q_tilde_grid]
    if not q_grid or not list(n_list):
        raise ValueError("grids must be non-empty")
    if any(q <= 0 for q in q_grid) or any(b <= a for a, b in zip(q_grid, q_grid[1:])):
        raise ValueError("q_tilde_grid must be positive and ascending")
    config = config or OptimizationConfig()
    config = OptimizationConfig(**dict(config.to_dict(), n_pulses=n_pulses, fixed_q_tilde=None))
    n_sorted = sorted(int(n) for n in n_list)

    done = {r.key: r for r in resume.rows} if resume is not None else {}
    tasks = [(n, q, contrast, config, gamma) for n in n_sorted for q in q_grid
             if (n, contrast, q) not in done]
    fresh = {}

    def record(row):
        fresh[row.key] = row
        if on_row is not None:
            on_row(row)

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for fut in as_completed([pool.submit(_row_task, t) for t in tasks]):
                record(fut.result())
    else:
        for t in tasks:
            record(_row_task(t))

    table = SweepTable(metadata={"kind": "gain-vs-shear", "contrast": contrast,
                                 "n_pulses": n_pulses, "gamma": gamma,
                                 "seed": config.seed, "n_starts": config.n_starts})
    for n in n_sorted:
        for q in q_grid:
            key = (n, contrast, q)
            table.add(done[key] if key in done else fresh[key])

    peaks = {}
    for n in n_sorted:
        rows = sorted(table.select(n_atoms=n), key=lambda r: r.q_tilde)
        peaks[n] = peak_location([r.q_tilde for r in rows], [r.gain_db for r in rows])
    exponents = {}
    if len(n_sorted) >= 3:
        for q in q_grid:
            exponents[q] = fit_table(table, "xi2_corrected", q_tilde=q)
    return GainShearResult(table, peaks, exponents)


def reevaluate_row(row: SweepRow) -> tuple[float, float]:
    """Recompute (epsilon, xi2) of a sequence row from its stored parameters."""
    system = build_system(row.n_atoms)
    final = propagate(initial_css(system), PulseSequence.from_params(row.params))
    eps = math.nan
    if row.contrast_target is not None:
        eps = infidelity(final, _target(row.n_atoms, row.contrast_target).state)
    return eps, wineland_xi2(final).xi2
