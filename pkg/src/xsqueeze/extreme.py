"""Extreme spin-squeezed states.

An extreme state at contrast ``c`` minimises the Wineland parameter among all
states with ``<S_x> = c S``.  It is the ground state of

    H / chi = S_z^2 - (Omega / chi) S_x,

with the ratio tuned until the ground state has the requested contrast.  chi
is fixed to 1 throughout; only the ratio is exposed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

from .dicke import SpinState, SpinSystem, expectation
from .errors import UnreachableContrastError
from .metrology import wineland_xi2

RATIO_BRACKET = (1e-6, 1e6)
RATIO_LIMITS = (1e-30, 1e30)


@dataclass(frozen=True)
class ExtremeSolution:
    state: SpinState
    omega_over_chi: float
    achieved_contrast: float
    xi2: float
    ground_energy: float

    @property
    def system(self) -> SpinSystem:
        return self.state.system


def hamiltonian_band(system: SpinSystem, omega_over_chi: float):
    """Diagonal and off-diagonal of S_z^2 - r S_x."""
    return system.m2.copy(), -omega_over_chi * system.sx_off


def ground_state(system: SpinSystem, omega_over_chi: float) -> tuple[SpinState, float]:
    """Lowest eigenpair of S_z^2 - (Omega/chi) S_x.

    The off-diagonal of the band is negative for r > 0, so the ground state
    has non-negative amplitudes; taking |v| also removes sign noise in the
    exponentially small tails.
    """
    if not omega_over_chi > 0:
        raise ValueError(f"omega_over_chi must be positive, got {omega_over_chi!r}")
    diag, off = hamiltonian_band(system, omega_over_chi)
    if system.dim == 1:  # pragma: no cover - n_atoms >= 1 means dim >= 2
        return SpinState(system, np.ones(1)), float(diag[0])
    w, v = sl.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    vec = np.abs(v[:, 0])
    vec = vec / np.linalg.norm(vec)
    return SpinState(system, vec.astype(np.complex128)), float(w[0])


def contrast_at(system: SpinSystem, omega_over_chi: float) -> float:
    """<S_x>/S of the ground state at the given ratio."""
    state, _ = ground_state(system, omega_over_chi)
    return expectation(state, "x") / system.total_spin


def solve_extreme(system: SpinSystem, target_contrast: float,
                  tolerance: float = 1e-10, max_iter: int = 400) -> ExtremeSolution:
    """Find the extreme state with ``<S_x>/S == target_contrast``.

    Bisection on log(Omega/chi); the contrast is increasing in the ratio, and
    the bracket is widened by factors of 1e3 when the target falls outside it.
    """
    if not 0.0 < target_contrast < 1.0:
        raise ValueError(f"target_contrast must lie in (0, 1), got {target_contrast!r}")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")

    lo, hi = RATIO_BRACKET
    c_lo = contrast_at(system, lo)
    while c_lo > target_contrast:
        lo /= 1e3
        c_prev, c_lo = c_lo, contrast_at(system, lo)
        # half-integer S plateaus at (2S+1)/(4S); stop before the m = +-1/2
        # splitting drops below eigensolver resolution
        if lo < RATIO_LIMITS[0] or c_lo > c_prev - 1e-9:
            raise UnreachableContrastError(
                f"contrast {target_contrast} below reach for N={system.n_atoms} "
                f"(ground-state contrast saturates near {c_lo:.6f})")
    while contrast_at(system, hi) < target_contrast:
        hi *= 1e3
        if hi > RATIO_LIMITS[1]:
            raise UnreachableContrastError(
                f"contrast {target_contrast} above reach for N={system.n_atoms}")

    a, b = np.log(lo), np.log(hi)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        ratio = float(np.exp(mid))
        state, energy = ground_state(system, ratio)
        c = expectation(state, "x") / system.total_spin
        if abs(c - target_contrast) <= tolerance:
            break
        if c < target_contrast:
            a = mid
        else:
            b = mid
        if b - a < 1e-15 * max(1.0, abs(mid)):
            raise UnreachableContrastError(
                f"bisection stalled at |contrast - target| = {abs(c - target_contrast):.3e}")
    else:
        raise UnreachableContrastError("bisection did not converge")

    return ExtremeSolution(
        state=state,
        omega_over_chi=ratio,
        achieved_contrast=c,
        xi2=wineland_xi2(state).xi2,
        ground_energy=energy,
    )
