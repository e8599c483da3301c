import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xsqueeze.dicke import build_system
from xsqueeze.extreme import solve_extreme
from xsqueeze.optimize import OptimizationConfig
from xsqueeze.pulses import PulseSequence
from xsqueeze.scaling import (SweepRow, SweepTable, default_n_grid, fit_table,
                              oat_scan, oat_xi2, peak_location, power_law_fit,
                              reevaluate_row, sweep_extreme_scaling,
                              sweep_gain_vs_shear, sweep_oat_scaling)


def _row(n, q=None, xi2=0.5, params=()):
    return SweepRow(n_atoms=n, contrast_target=0.9 if q is not None else None, q_tilde=q,
                    epsilon=None, xi2=xi2, xi2_corrected=None, gain_db=-10 * math.log10(xi2),
                    omega_over_chi=None, params=params)


# ---------------------------------------------------------------------------
# power-law fit
# ---------------------------------------------------------------------------

def test_fit_exact_power_law():
    fit = power_law_fit([(n, 2.0 / n) for n in (10, 20, 40, 80)])
    assert fit.b == pytest.approx(1.0, abs=1e-12)
    assert fit.a == pytest.approx(2.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit(50) == pytest.approx(0.04)


def test_fit_constant_data():
    fit = power_law_fit([(n, 0.3) for n in (5, 10, 20)])
    assert abs(fit.b) < 1e-12 and fit.r_squared == 1.0


@given(a=st.floats(0.01, 100), b=st.floats(-2, 2),
       ns=st.lists(st.integers(2, 1000), min_size=3, max_size=8, unique=True))
def test_fit_recovers_parameters(a, b, ns):
    fit = power_law_fit([(n, a * n ** (-b)) for n in ns])
    assert fit.b == pytest.approx(b, abs=1e-8)
    assert fit.a == pytest.approx(a, rel=1e-7)
    assert 0 <= fit.r_squared <= 1


@pytest.mark.parametrize("pts", [[(10, 1.0), (20, 0.5)], [(10, 1.0), (20, -0.5), (30, 0.1)],
                                 [(0, 1.0), (20, 0.5), (30, 0.1)]])
def test_fit_validation(pts):
    with pytest.raises(ValueError):
        power_law_fit(pts)


def test_default_grid_even_and_bounded():
    grid = default_n_grid()
    assert grid[0] == 20 and grid[-1] == 200 and len(grid) == 8
    assert all(n % 2 == 0 for n in grid)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def test_table_rejects_duplicates_and_bad_xi2():
    table = SweepTable()
    table.add(_row(10))
    with pytest.raises(ValueError):
        table.add(_row(10))
    with pytest.raises(ValueError):
        table.add(_row(12, xi2=0.0))


def test_csv_round_trip(tmp_path):
    table = SweepTable()
    table.add(_row(20, 0.3, 0.123456789012345678, params=(0.1, -0.2, 1e-17, 3.0)))
    table.add(_row(10))
    table.add(SweepRow(n_atoms=50, contrast_target=0.9, q_tilde=0.5, epsilon=np.float64(1e-4),
                       xi2=0.2, xi2_corrected=0.3, gain_db=np.float64(5.2), omega_over_chi=0.31))
    path = tmp_path / "t.csv"
    table.to_csv(path)
    back = SweepTable.from_csv(path)
    assert back.rows == table.rows
    assert "np.float64" not in path.read_text()


def test_csv_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("n_atoms,xi2\n10,0.5\n")
    with pytest.raises(ValueError):
        SweepTable.from_csv(path)


def test_sort_and_select():
    table = SweepTable()
    for n, q in [(20, 0.5), (10, 0.5), (10, 0.1)]:
        table.add(_row(n, q))
    table.sort()
    assert [r.key[::2] for r in table.rows] == [(10, 0.1), (10, 0.5), (20, 0.5)]
    assert len(table.select(n_atoms=10)) == 2
    assert table.column("n_atoms") == [10, 10, 20]


# ---------------------------------------------------------------------------
# extreme and OAT sweeps
# ---------------------------------------------------------------------------

def test_extreme_sweep_rows_match_solver():
    table = sweep_extreme_scaling([60, 20], 0.9)
    assert table.column("n_atoms") == [20, 60]
    row = table.select(n_atoms=60)[0]
    sol = solve_extreme(build_system(60), 0.9)
    assert row.xi2 == sol.xi2 and row.omega_over_chi == sol.omega_over_chi
    assert row.gain_db == pytest.approx(-10 * math.log10(sol.xi2))


def test_extreme_sweep_low_contrast_exponent_near_one():
    fit = fit_table(sweep_extreme_scaling(default_n_grid(20, 200, 5), 0.5))
    assert 0.9 <= fit.b <= 1.05 and fit.r_squared >= 0.99


def test_oat_scan_n4_interior_minimum():
    s = build_system(4)
    scan = oat_scan(s, 400)
    assert scan.interior and scan.xi2 < 1
    assert scan.xi2 == pytest.approx(0.5115562887, rel=1e-9)
    assert scan.xi2 <= scan.xi2_grid.min()
    assert oat_xi2(s, scan.shear) == pytest.approx(scan.xi2, rel=1e-12)


def test_oat_scan_boundary_flagged():
    scan = oat_scan(build_system(20), 50, q_max=1e-3)
    assert not scan.interior


def test_oat_sweep_exponent():
    fit = fit_table(sweep_oat_scaling(default_n_grid(20, 300, 6), 600))
    assert 0.6 <= fit.b <= 0.74


def test_sweeps_reject_small_n():
    with pytest.raises(ValueError):
        sweep_extreme_scaling([1, 10], 0.5)
    with pytest.raises(ValueError):
        sweep_oat_scaling([2, 10])


# ---------------------------------------------------------------------------
# gain versus shear
# ---------------------------------------------------------------------------

def test_peak_location():
    q = np.linspace(0.1, 1.5, 15)
    g = -(q - 0.47) ** 2 + 3.0
    est = peak_location(q, g)
    assert est.interior and est.q_tilde == pytest.approx(0.47, abs=1e-12)
    assert est.gain_db == pytest.approx(3.0, abs=1e-12)
    edge = peak_location(q, q)
    assert not edge.interior and edge.q_tilde == pytest.approx(1.5)


@pytest.fixture(scope="module")
def small_gain_sweep():
    cfg = OptimizationConfig(n_starts=3, seed=2)
    return sweep_gain_vs_shear([20, 30, 40], [0.3, 0.6, 0.9], config=cfg)


def test_gain_sweep_structure(small_gain_sweep):
    res = small_gain_sweep
    assert len(res.table.rows) == 9
    assert set(res.peaks) == {20, 30, 40}
    assert set(res.exponents) == {0.3, 0.6, 0.9}
    for row in res.table.rows:
        seq = PulseSequence.from_params(row.params)
        assert abs(seq.normalized_shear(build_system(row.n_atoms)) - row.q_tilde) <= 1e-10
        assert row.xi2_corrected >= row.xi2
        assert 0 <= row.epsilon <= 1


def test_gain_sweep_rows_reproducible(small_gain_sweep):
    for row in small_gain_sweep.table.rows:
        eps, xi2 = reevaluate_row(row)
        assert abs(eps - row.epsilon) <= 1e-12
        assert abs(xi2 - row.xi2) <= 1e-12 * max(1.0, row.xi2)


def test_gain_sweep_resume(small_gain_sweep):
    partial = SweepTable(rows=small_gain_sweep.table.rows[:4])
    seen = []
    cfg = OptimizationConfig(n_starts=3, seed=2)
    res = sweep_gain_vs_shear([20, 30, 40], [0.3, 0.6, 0.9], config=cfg, resume=partial,
                              on_row=seen.append)
    assert len(seen) == 5
    assert res.table.rows == small_gain_sweep.table.rows


def test_gain_sweep_validation():
    with pytest.raises(ValueError):
        sweep_gain_vs_shear([20], [0.5, 0.3])
    with pytest.raises(ValueError):
        sweep_gain_vs_shear([20], [0.0, 0.3])
    with pytest.raises(ValueError):
        sweep_gain_vs_shear([], [0.3])
