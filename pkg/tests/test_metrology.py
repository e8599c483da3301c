import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dense_xi2
from xsqueeze.dicke import build_system, coherent_state, dicke_state, rotate
from xsqueeze.errors import DegenerateDirectionError, DivergentSensitivityError
from xsqueeze.extreme import solve_extreme
from xsqueeze.metrology import (LossModel, contrast_loss, corrected_xi2,
                                gain_db, orient_for_readout, ramsey_sensitivity,
                                ramsey_signal, ramsey_slope,
                                ramsey_slope_analytic, wineland_xi2)
from xsqueeze.pulses import PulseSequence, initial_css, propagate


def test_css_is_sql():
    rep = wineland_xi2(coherent_state(build_system(30), np.pi / 2, 0))
    assert abs(rep.xi2 - 1) < 1e-12
    assert abs(rep.gain_db) < 1e-10
    assert abs(rep.contrast - 1) < 1e-12


def test_report_self_consistent():
    sol = solve_extreme(build_system(60), 0.9)
    rep = wineland_xi2(sol.state)
    assert rep.xi2 < 1
    assert rep.xi2 == pytest.approx(0.08473565617945462, rel=1e-8)
    assert abs(rep.gain_db + 10 * np.log10(rep.xi2)) < 1e-12
    mean = rep.mean_spin
    assert abs(rep.xi2 - rep.min_perp_variance * 60 / (mean @ mean)) <= 1e-12 * rep.xi2
    assert rep.contrast == pytest.approx(0.9, abs=1e-10)


def test_xi2_matches_brute_force_direction_scan():
    s = build_system(14)
    state = propagate(initial_css(s), PulseSequence.from_params([0.21, 0.4, -0.1, 1.3]))
    assert wineland_xi2(state).xi2 == pytest.approx(dense_xi2(14, state.amplitudes), rel=1e-7)


def test_dicke_ring_has_no_xi2():
    with pytest.raises(DegenerateDirectionError):
        wineland_xi2(dicke_state(build_system(10), 0))


@given(axis=st.sampled_from(["x", "y", "z"]), a=st.floats(-np.pi, np.pi))
def test_xi2_rotation_invariant(axis, a):
    s = build_system(25)
    state = propagate(initial_css(s), PulseSequence.from_params([0.08, 0.9]))
    assert abs(wineland_xi2(rotate(state, axis, a)).xi2 - wineland_xi2(state).xi2) < 1e-9


def test_gain_db_rejects_non_positive():
    with pytest.raises(ValueError):
        gain_db(0.0)
    assert gain_db(0.1) == pytest.approx(10.0)


def test_contrast_loss_examples():
    assert contrast_loss(LossModel(), 0.0) == 1.0
    assert contrast_loss(LossModel(0.36), 0.55) == pytest.approx(0.820369853137831, rel=1e-14)
    assert contrast_loss(LossModel(0.0), 3.7) == 1.0
    assert LossModel().gamma == 0.36
    with pytest.raises(ValueError):
        contrast_loss(LossModel(), -0.1)
    with pytest.raises(ValueError):
        LossModel(-1.0)


@given(q=st.floats(0, 20))
def test_contrast_loss_in_unit_interval(q):
    c = contrast_loss(LossModel(), q)
    assert 0 < c <= 1


def test_corrected_xi2_examples():
    assert corrected_xi2(0.1, 1.0) == pytest.approx(0.1)
    assert corrected_xi2(0.1, 0.5) == pytest.approx(0.4)
    for bad in [(0.0, 0.5), (-1.0, 0.5), (0.1, 0.0), (0.1, 1.2)]:
        with pytest.raises(ValueError):
            corrected_xi2(*bad)


def test_corrected_xi2_monotone_in_shear():
    q = np.linspace(0, 3, 50)
    vals = [corrected_xi2(0.05, contrast_loss(LossModel(), x)) for x in q]
    assert np.all(np.diff(vals) > 0)


# ---------------------------------------------------------------------------
# Ramsey readout
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("axis", ["x", "y"])
def test_css_ramsey_sql(axis):
    s = build_system(40)
    state = orient_for_readout(coherent_state(s, 0.7, 2.0), axis)
    assert ramsey_sensitivity(state, 0.0, axis) == pytest.approx(1 / np.sqrt(40), rel=1e-9)


def test_css_along_x_without_orientation():
    s = build_system(40)
    css = coherent_state(s, np.pi / 2, 0.0)
    assert ramsey_sensitivity(css, 0.0, "x") == pytest.approx(1 / np.sqrt(40), rel=1e-9)


def test_fringe_top_divergent():
    s = build_system(30)
    css = coherent_state(s, np.pi / 2, 0.0)
    with pytest.raises(DivergentSensitivityError):
        ramsey_sensitivity(css, np.pi / 2, "x")


@pytest.mark.parametrize("n", [20, 60])
@pytest.mark.parametrize("c", [0.5, 0.9])
@pytest.mark.parametrize("axis", ["x", "y"])
def test_extreme_ramsey_matches_wineland(n, c, axis):
    sol = solve_extreme(build_system(n), c)
    prepared = orient_for_readout(sol.state, axis)
    dphi = ramsey_sensitivity(prepared, 0.0, axis)
    assert abs(dphi * np.sqrt(n) / np.sqrt(sol.xi2) - 1) < 1e-8


def test_orientation_aligns_mean_and_squeezing():
    sol = solve_extreme(build_system(30), 0.8)
    for axis, mean_idx in (("x", 0), ("y", 1)):
        out = orient_for_readout(rotate(rotate(sol.state, "y", 0.4), "z", 1.1), axis)
        rep = wineland_xi2(out)
        assert abs(rep.mean_spin[mean_idx] - 0.8 * 15) < 1e-8
        d = rep.squeezed_direction.as_array()
        # squeezed quadrature must sit on the equatorial axis mapped onto z
        assert abs(abs(d[1 - mean_idx]) - 1) < 1e-8


@given(phase=st.floats(-1.2, 1.2), axis=st.sampled_from(["x", "y"]))
def test_fd_slope_matches_analytic(phase, axis):
    sol = solve_extreme(build_system(20), 0.9)
    state = orient_for_readout(sol.state, axis)
    fd = ramsey_slope(state, phase, axis)
    exact = ramsey_slope_analytic(state, phase, axis)
    assert abs(fd - exact) <= 1e-9 * max(1.0, abs(exact))


def test_signal_fringe_shape_css():
    s = build_system(10)
    css = coherent_state(s, np.pi / 2, 0.0)
    phases = np.linspace(-np.pi, np.pi, 9)
    # readout x measures S_y after free evolution: S sin(phase)
    sig = [ramsey_signal(css, p, "x") for p in phases]
    np.testing.assert_allclose(sig, 5 * np.sin(phases), atol=1e-12)


def test_readout_axis_validated():
    css = coherent_state(build_system(4), np.pi / 2, 0.0)
    with pytest.raises(ValueError):
        ramsey_signal(css, 0.0, "z")
    with pytest.raises(ValueError):
        orient_for_readout(css, "z")


def test_generic_state_sensitivity_matches_xi():
    # at the optimal operating point Delta phi reproduces xi for any squeezed state
    rng = np.random.default_rng(5)
    s = build_system(12)
    for _ in range(5):
        params = rng.uniform(-0.4, 0.4, 4)
        state = propagate(initial_css(s), PulseSequence.from_params(params))
        prepared = orient_for_readout(state, "x")
        dphi = ramsey_sensitivity(prepared, 0.0, "x")
        assert dphi * np.sqrt(12) == pytest.approx(np.sqrt(wineland_xi2(state).xi2), rel=1e-8)

