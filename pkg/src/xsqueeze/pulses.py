"""Alternating one-axis-twisting / x-rotation pulse sequences.

A sequence of ``n`` pulses (``n`` even) acts on the initial state as

    exp(-i mu_n S_x) exp(-i Q_{n-1} S_z^2) ... exp(-i mu_2 S_x) exp(-i Q_1 S_z^2)

with shears ``Q_k = chi dt`` and rotation angles ``mu_k = Omega dt``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dicke import SpinState, SpinSystem, coherent_state


@dataclass(frozen=True)
class PulseSequence:
    """Shears ``Q_1, Q_3, ...`` and rotation angles ``mu_2, mu_4, ...``."""

    shears: tuple
    angles: tuple

    def __post_init__(self):
        shears = tuple(float(q) for q in self.shears)
        angles = tuple(float(a) for a in self.angles)
        if len(shears) != len(angles):
            raise ValueError("a sequence alternates shear/rotation and ends on a rotation")
        if not all(np.isfinite(shears + angles)):
            raise ValueError("pulse parameters must be finite")
        object.__setattr__(self, "shears", shears)
        object.__setattr__(self, "angles", angles)

    @classmethod
    def from_params(cls, params) -> "PulseSequence":
        params = np.asarray(params, dtype=float)
        if params.ndim != 1 or params.size % 2:
            raise ValueError("params must be a flat array of even length")
        return cls(tuple(params[0::2]), tuple(params[1::2]))

    @classmethod
    def zeros(cls, n_pulses: int) -> "PulseSequence":
        return cls.from_params(np.zeros(n_pulses))

    @property
    def n_pulses(self) -> int:
        return 2 * len(self.shears)

    @property
    def params(self) -> np.ndarray:
        out = np.empty(self.n_pulses)
        out[0::2] = self.shears
        out[1::2] = self.angles
        return out

    @property
    def total_shear(self) -> float:
        return float(np.sum(np.abs(self.shears)))

    def normalized_shear(self, system: SpinSystem) -> float:
        """Q_tilde = sqrt(N) * sum |Q_k|."""
        return float(np.sqrt(system.n_atoms) * self.total_shear)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        return PulseSequence(self.shears + other.shears, self.angles + other.angles)


def initial_css(system: SpinSystem) -> SpinState:
    """CSS along +x, the starting point of every sequence."""
    return coherent_state(system, 0.5 * np.pi, 0.0)


def _kernel_args(system: SpinSystem):
    return system.m2, system.sx_eigvals, system.sx_eigvecs, system.sx_eigvecs_t


def propagate(initial: SpinState, sequence: PulseSequence) -> SpinState:
    system = initial.system
    m2, lam, vec, vec_t = _kernel_args(system)
    psi = kernels.propagate(initial.amplitudes, sequence.params, m2, lam, vec, vec_t)
    return SpinState(system, psi)


def propagate_snapshots(initial: SpinState, sequence: PulseSequence) -> list[SpinState]:
    """States after each pulse (the initial state first)."""
    system = initial.system
    m2, lam, vec, vec_t = _kernel_args(system)
    states = kernels.forward_states(initial.amplitudes, sequence.params, m2, lam, vec, vec_t)
    return [SpinState(system, s) for s in states]


def infidelity(state: SpinState, target: SpinState) -> float:
    """1 - |<state|target>|^2."""
    if state.system.dim != target.system.dim:
        raise ValueError("state and target have different dimensions")
    eps = 1.0 - abs(np.vdot(target.amplitudes, state.amplitudes)) ** 2
    return float(min(max(eps, 0.0), 1.0))


def infidelity_and_gradient(initial: SpinState, params, target: SpinState) -> tuple[float, np.ndarray]:
    """Infidelity of the propagated state and its gradient in the flat parameters.

    One forward sweep stores the intermediate states; one backward sweep
    carries the target through the inverse pulses and picks up
    ``-i S_z^2`` (shears) or ``-i S_x`` (rotations) at each position.
    """
    system = initial.system
    if target.system.dim != system.dim:
        raise ValueError("initial and target states have different dimensions")
    m2, lam, vec, vec_t = _kernel_args(system)
    eps, grad = kernels.infidelity_and_gradient(
        initial.amplitudes, target.amplitudes, np.asarray(params, dtype=float),
        m2, system.sx_off, lam, vec, vec_t)
    return float(eps), grad


def infidelity_gradient(initial: SpinState, sequence: PulseSequence, target: SpinState) -> np.ndarray:
    return infidelity_and_gradient(initial, sequence.params, target)[1]


# ---------------------------------------------------------------------------
# cavity OAT via spin echo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CavityEchoSpec:
    """One arm of the cavity echo: H t = alpha (S_z + S) - chi_t S_z^2.

    ``alpha`` and ``chi_t`` are the accumulated (dimensionless) light-shift
    rotation and shear of one interaction window; they derive from the light
    shift per photon and the photon number, which are not modelled further.
    """

    alpha: float
    chi_t: float


@dataclass(frozen=True)
class EchoReport:
    deviation: float
    probe_deviation: float
    global_phase: complex
    expected_global_phase: complex
    effective_shear: float


def echo_oat(system: SpinSystem, spec: CavityEchoSpec, n_random_probes: int = 4,
             seed: int = 0) -> EchoReport:
    """Check that U R U equals R exp(+2 i chi_t S_z^2) up to a global phase.

    ``U`` is one cavity window and ``R = exp(-i pi S_x)``.  Since R flips S_z,
    the linear light-shift term cancels between the two windows and only the
    constant ``alpha S`` survives, as the phase ``exp(-2 i alpha S)``.

    ``deviation`` is the largest entry of ``composed - phase * reference``;
    ``probe_deviation`` is max |1 - |<ref psi|composed psi>|| over the Dicke
    basis plus a few random probe states.
    """
    S = system.total_spin
    m, m2 = system.m, system.m2
    u_diag = np.exp(-1j * (spec.alpha * (m + S) - spec.chi_t * m2))
    lam, vec = system.sx_eigvals, system.sx_eigvecs
    r = (vec * np.exp(-1j * np.pi * lam)) @ vec.T
    composed = u_diag[:, None] * r * u_diag[None, :]
    reference = r * np.exp(2j * spec.chi_t * m2)[None, :]

    overlap = np.trace(reference.conj().T @ composed) / system.dim
    phase = overlap / abs(overlap)
    deviation = float(np.max(np.abs(composed - phase * reference)))

    rng = np.random.default_rng(seed)
    probes = [np.eye(system.dim, dtype=np.complex128)[i] for i in range(system.dim)]
    for _ in range(n_random_probes):
        v = rng.normal(size=system.dim) + 1j * rng.normal(size=system.dim)
        probes.append(v / np.linalg.norm(v))
    probe_dev = max(abs(1.0 - abs(np.vdot(reference @ p, composed @ p))) for p in probes)

    return EchoReport(
        deviation=deviation,
        probe_deviation=float(probe_dev),
        global_phase=complex(phase),
        expected_global_phase=complex(np.exp(-2j * spec.alpha * S)),
        effective_shear=-2.0 * spec.chi_t,
    )
