"""Figures of merit for Ramsey interferometry with squeezed states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dicke import (Direction, SpinState, expectation, mean_spin_vector,
                    min_perpendicular_variance, rotate, rotate_amplitudes)
from .errors import DivergentSensitivityError

DEFAULT_GAMMA = 0.36
FD_STEP = 1e-5
DIVERGENCE_THRESHOLD = 1e-12  # relative to S


@dataclass(frozen=True)
class MetrologyReport:
    xi2: float
    gain_db: float
    mean_spin: np.ndarray
    min_perp_variance: float
    squeezed_direction: Direction
    contrast: float


def gain_db(xi2: float) -> float:
    """Metrological gain in dB, -10 log10(xi^2)."""
    if not xi2 > 0:
        raise ValueError(f"xi2 must be positive, got {xi2!r}")
    return float(-10.0 * np.log10(xi2))


def wineland_xi2(state: SpinState) -> MetrologyReport:
    """Wineland parameter: N min_perp Var(S_u) / |<S>|^2.

    Raises :class:`~xsqueeze.errors.DegenerateDirectionError` when the mean
    spin vanishes.
    """
    var, direction = min_perpendicular_variance(state)
    mean = mean_spin_vector(state)
    length2 = float(mean @ mean)
    xi2 = var * state.n_atoms / length2
    return MetrologyReport(
        xi2=xi2,
        gain_db=gain_db(xi2),
        mean_spin=mean,
        min_perp_variance=var,
        squeezed_direction=direction,
        contrast=float(np.sqrt(length2) / state.system.total_spin),
    )


@dataclass(frozen=True)
class LossModel:
    """Photon-scattering contrast loss C = exp(-gamma * Q_tilde)."""

    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


def contrast_loss(model: LossModel, q_tilde: float) -> float:
    if q_tilde < 0:
        raise ValueError(f"q_tilde must be non-negative, got {q_tilde!r}")
    return float(np.exp(-model.gamma * q_tilde))


def corrected_xi2(xi2: float, c_sc: float) -> float:
    """Loss-corrected squeezing xi^2 / C^2."""
    if not xi2 > 0:
        raise ValueError(f"xi2 must be positive, got {xi2!r}")
    if not 0 < c_sc <= 1:
        raise ValueError(f"contrast factor must lie in (0, 1], got {c_sc!r}")
    return xi2 / c_sc ** 2


# ---------------------------------------------------------------------------
# Ramsey sequence
# ---------------------------------------------------------------------------

READOUT_AXES = ("x", "y")


def orient_for_readout(state: SpinState, readout_axis: str = "x") -> SpinState:
    """Rotate ``state`` into the optimal Ramsey operating point.

    The mean spin is brought onto the readout axis and the squeezed
    quadrature onto the equatorial axis that the final pi/2 pulse maps to z
    (y for an x readout, x for a y readout).
    """
    if readout_axis not in READOUT_AXES:
        raise ValueError(f"readout_axis must be 'x' or 'y', got {readout_axis!r}")
    mean = mean_spin_vector(state)
    n = mean / np.linalg.norm(mean)
    theta = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
    phi = float(np.arctan2(n[1], n[0]))
    out = rotate(rotate(state, "z", -phi), "y", 0.5 * np.pi - theta)
    _, d = min_perpendicular_variance(out)
    beta = float(np.arctan2(d.z, d.y))
    out = rotate(out, "x", -beta)
    if readout_axis == "y":
        out = rotate(out, "z", 0.5 * np.pi)
    return out


def ramsey_final_state(state: SpinState, phase: float, readout_axis: str = "x") -> SpinState:
    """Free evolution exp(-i phase S_z) followed by the closing pi/2 pulse."""
    if readout_axis not in READOUT_AXES:
        raise ValueError(f"readout_axis must be 'x' or 'y', got {readout_axis!r}")
    return rotate(rotate(state, "z", phase), readout_axis, 0.5 * np.pi)


def ramsey_signal(state: SpinState, phase: float, readout_axis: str = "x") -> float:
    """<S_z> after the Ramsey sequence."""
    return expectation(ramsey_final_state(state, phase, readout_axis), "z")


def ramsey_slope(state: SpinState, phase: float, readout_axis: str = "x",
                 step: float = FD_STEP) -> float:
    """d<S_z>/d(phase) by central differences plus one Richardson level."""
    def central(h):
        return (ramsey_signal(state, phase + h, readout_axis)
                - ramsey_signal(state, phase - h, readout_axis)) / (2 * h)

    d_h = central(step)
    d_h2 = central(0.5 * step)
    return (4.0 * d_h2 - d_h) / 3.0


def ramsey_slope_analytic(state: SpinState, phase: float, readout_axis: str = "x") -> float:
    """Same slope from the commutator identity d<S_z>/dphi = <i [S_z, M]>.

    ``M`` is the readout observable pulled back through the closing pulse.
    """
    system = state.system
    psi_phi = rotate_amplitudes(state.amplitudes, system, "z", phase)
    final = rotate_amplitudes(psi_phi, system, readout_axis, 0.5 * np.pi)
    m_psi = rotate_amplitudes(system.m * final, system, readout_axis, -0.5 * np.pi)
    return float(-2.0 * np.imag(np.vdot(system.m * psi_phi, m_psi)))


def ramsey_sensitivity(state: SpinState, phase: float, readout_axis: str = "x") -> float:
    """Phase uncertainty Delta S_z / |d<S_z>/dphi| of the Ramsey readout.

    ``state`` is the prepared input (after squeezing and any alignment, see
    :func:`orient_for_readout`).  The slope is the finite-difference one;
    the vanishing-slope test uses the analytic slope, since the difference
    quotient carries roundoff of order 1e-11 S.
    """
    S = state.system.total_spin
    exact = ramsey_slope_analytic(state, phase, readout_axis)
    if abs(exact) < DIVERGENCE_THRESHOLD * S:
        raise DivergentSensitivityError(
            f"signal slope {exact:.3e} vanishes at phase {phase!r}")
    slope = ramsey_slope(state, phase, readout_axis)
    final = ramsey_final_state(state, phase, readout_axis)
    var = expectation(final, "z2") - expectation(final, "z") ** 2
    return float(np.sqrt(max(var, 0.0)) / abs(slope))
