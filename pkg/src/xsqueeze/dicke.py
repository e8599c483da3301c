"""Collective spin algebra on the symmetric (Dicke) subspace.

Basis index ``i`` in ``[0, N]`` carries ``m = i - S`` (ascending), so S_z is
diagonal and S_x is real symmetric tridiagonal.  Everything here works on the
tridiagonal band directly; dense matrices are only built on request.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg as sl
from scipy.special import gammaln, xlogy

from .errors import DegenerateDirectionError

NORM_TOL = 1e-12
AXES = ("x", "y", "z")


class SpinSystem:
    """Collective spin of ``n_atoms`` two-level atoms, S = N/2.

    The S_x eigendecomposition is computed once at construction and reused by
    every x (and, via z-conjugation, y) rotation.  Instances are treated as
    immutable; use :func:`build_system` to share them.
    """

    def __init__(self, n_atoms: int):
        n_atoms = int(n_atoms)
        if n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
        self.n_atoms = n_atoms
        self.total_spin = n_atoms / 2
        self.dim = n_atoms + 1
        S = self.total_spin
        self.m = np.arange(self.dim) - S
        self.m2 = self.m ** 2
        mm = self.m[:-1]
        # <m+1| S_x |m>
        self.sx_off = 0.5 * np.sqrt(S * (S + 1) - mm * (mm + 1))
        lam, vec = sl.eigh_tridiagonal(np.zeros(self.dim), self.sx_off)
        self.sx_eigvals = lam
        self.sx_eigvecs = vec
        self.sx_eigvecs_t = np.ascontiguousarray(vec.T)
        for arr in (self.m, self.m2, self.sx_off, lam, vec, self.sx_eigvecs_t):
            arr.setflags(write=False)

    def __repr__(self):
        return f"SpinSystem(n_atoms={self.n_atoms})"

    # dense operators, built lazily (tests and small-N oracles only)
    @cached_property
    def sx(self):
        return np.diag(self.sx_off, 1) + np.diag(self.sx_off, -1)

    @cached_property
    def sy(self):
        return 1j * np.diag(self.sx_off, 1) - 1j * np.diag(self.sx_off, -1)

    @cached_property
    def sz(self):
        return np.diag(self.m)

    @cached_property
    def sz2(self):
        return np.diag(self.m2)

    def operator(self, name: str) -> np.ndarray:
        return {"x": self.sx, "y": self.sy, "z": self.sz, "z2": self.sz2}[name]


@lru_cache(maxsize=64)
def build_system(n_atoms: int) -> SpinSystem:
    return SpinSystem(n_atoms)


@dataclass(frozen=True)
class Direction:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"direction must be a unit vector, |u| = {norm!r}")

    @classmethod
    def from_vector(cls, v, normalize: bool = False) -> "Direction":
        v = np.asarray(v, dtype=float)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


X_AXIS = Direction(1.0, 0.0, 0.0)
Y_AXIS = Direction(0.0, 1.0, 0.0)
Z_AXIS = Direction(0.0, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class SpinState:
    """Pure state on the symmetric subspace of ``system``."""

    system: SpinSystem
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.system.dim,):
            raise ValueError(
                f"expected {self.system.dim} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, system: SpinSystem, amplitudes) -> "SpinState":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        return cls(system, amps / np.linalg.norm(amps))

    @property
    def n_atoms(self) -> int:
        return self.system.n_atoms

    def overlap(self, other: "SpinState") -> complex:
        if other.system.dim != self.system.dim:
            raise ValueError("states live in different Hilbert spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def dicke_state(system: SpinSystem, m: float) -> SpinState:
    """S_z eigenstate with eigenvalue ``m``."""
    idx = m + system.total_spin
    if abs(idx - round(idx)) > 1e-9 or not 0 <= round(idx) < system.dim:
        raise ValueError(f"m={m} is not a valid projection for S={system.total_spin}")
    amps = np.zeros(system.dim, dtype=np.complex128)
    amps[int(round(idx))] = 1.0
    return SpinState(system, amps)


def coherent_amplitude_magnitudes(system: SpinSystem, theta) -> np.ndarray:
    """sqrt(C(2S, S+m)) cos(theta/2)^(S+m) sin(theta/2)^(S-m) for each theta.

    Returns an array of shape ``(len(theta), dim)``; computed in log space so
    large N does not overflow the binomial factor.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    N = system.n_atoms
    k = np.arange(system.dim)  # k = S + m
    log_binom = gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)
    c = np.abs(np.cos(theta / 2))[:, None]
    s = np.abs(np.sin(theta / 2))[:, None]
    logs = 0.5 * log_binom + xlogy(k, c) + xlogy(N - k, s)
    mag = np.exp(logs)
    # recover signs of cos/sin for angles outside [0, pi]
    sign = np.sign(np.cos(theta / 2))[:, None] ** k * np.sign(np.sin(theta / 2))[:, None] ** (N - k)
    sign = np.where(mag == 0.0, 1.0, sign)
    return mag * sign


def coherent_state(system: SpinSystem, theta: float, phi: float) -> SpinState:
    """CSS pointing along polar angle ``theta`` and azimuth ``phi``.

    Phase convention: amplitude at ``m`` carries ``exp(+i (S - m) phi)``, which
    places the mean spin at ``S (sin th cos ph, sin th sin ph, cos th)``.
    """
    mag = coherent_amplitude_magnitudes(system, theta)[0]
    phase = np.exp(1j * (system.total_spin - system.m) * phi)
    amps = mag * phase
    # residual norm error from gammaln is ~1e-15; renormalize for exactness
    return SpinState(system, amps / np.linalg.norm(amps))


def _as_array(state) -> np.ndarray:
    return state.amplitudes if isinstance(state, SpinState) else np.asarray(state)


def apply_operator(state, system: SpinSystem, name: str) -> np.ndarray:
    """Apply S_x, S_y, S_z or S_z^2 (``"x"``, ``"y"``, ``"z"``, ``"z2"``) to raw amplitudes."""
    psi = _as_array(state)
    off = system.sx_off
    if name == "z":
        return system.m * psi
    if name == "z2":
        return system.m2 * psi
    out = np.zeros_like(psi, dtype=np.complex128)
    if name == "x":
        out[:-1] += off * psi[1:]
        out[1:] += off * psi[:-1]
    elif name == "y":
        out[:-1] += 1j * off * psi[1:]
        out[1:] -= 1j * off * psi[:-1]
    else:
        raise ValueError(f"unknown operator {name!r}")
    return out


def _apply_direction(psi, system, u) -> np.ndarray:
    return (u[0] * apply_operator(psi, system, "x")
            + u[1] * apply_operator(psi, system, "y")
            + u[2] * apply_operator(psi, system, "z"))


def expectation(state: SpinState, operator: str) -> float:
    """<psi|O|psi> for O in {"x", "y", "z", "z2"}."""
    psi = state.amplitudes
    val = np.vdot(psi, apply_operator(psi, state.system, operator))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ArithmeticError(f"non-real expectation value {val!r}")
    return float(val.real)


def mean_spin_vector(state: SpinState) -> np.ndarray:
    return np.array([expectation(state, a) for a in AXES])


def _direction_array(direction) -> np.ndarray:
    if isinstance(direction, Direction):
        return direction.as_array()
    return Direction.from_vector(direction).as_array()


def variance(state: SpinState, direction) -> float:
    """Var(S_u) for a unit direction ``u``."""
    u = _direction_array(direction)
    su = _apply_direction(state.amplitudes, state.system, u)
    mean = np.vdot(state.amplitudes, su).real
    return max(float(np.vdot(su, su).real - mean ** 2), 0.0)


def perpendicular_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair spanning the plane perpendicular to unit vector ``n``."""
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v


def min_perpendicular_variance(state: SpinState, basis=None) -> tuple[float, Direction]:
    """Smallest spin variance over directions perpendicular to the mean spin.

    Solves the 2x2 covariance eigenproblem in an orthonormal basis of the plane
    perpendicular to <S>.  ``basis`` overrides the automatically chosen pair
    (the result does not depend on it).
    """
    system = state.system
    mean = mean_spin_vector(state)
    length = np.linalg.norm(mean)
    if length <= 1e-9 * system.total_spin:
        raise DegenerateDirectionError(
            f"mean spin length {length:.3e} too small to define a direction")
    n = mean / length
    u, v = perpendicular_basis(n) if basis is None else (np.asarray(basis[0]), np.asarray(basis[1]))
    psi = state.amplitudes
    su = _apply_direction(psi, system, u)
    sv = _apply_direction(psi, system, v)
    eu = np.vdot(psi, su).real
    ev = np.vdot(psi, sv).real
    cov = np.array([
        [np.vdot(su, su).real - eu * eu, np.vdot(su, sv).real - eu * ev],
        [np.vdot(sv, su).real - ev * eu, np.vdot(sv, sv).real - ev * ev],
    ])
    cov = 0.5 * (cov + cov.T)
    w, vecs = np.linalg.eigh(cov)
    d = vecs[0, 0] * u + vecs[1, 0] * v
    return max(float(w[0]), 0.0), Direction.from_vector(d, normalize=True)


def rotate_amplitudes(psi: np.ndarray, system: SpinSystem, axis: str, angle: float) -> np.ndarray:
    """exp(-i angle S_axis) applied to a raw amplitude vector."""
    if axis == "z":
        return np.exp(-1j * angle * system.m) * psi
    if axis == "x":
        return _rotate_x(psi, angle, system)
    if axis == "y":
        # R_y(a) = R_z(pi/2) R_x(a) R_z(-pi/2)
        quarter = np.exp(-0.5j * np.pi * system.m)
        return quarter * _rotate_x(np.conj(quarter) * psi, angle, system)
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def rotate(state: SpinState, axis: str, angle: float) -> SpinState:
    """Apply exp(-i angle S_axis) for axis in {"x", "y", "z"}."""
    return SpinState(state.system, rotate_amplitudes(state.amplitudes, state.system, axis, angle))


def _rotate_x(psi, angle, system):
    if angle == 0.0:
        return np.array(psi, dtype=np.complex128)
    vec, vec_t = system.sx_eigvecs, system.sx_eigvecs_t
    c = (vec_t @ psi.real + 1j * (vec_t @ psi.imag)) * np.exp(-1j * angle * system.sx_eigvals)
    return vec @ c.real + 1j * (vec @ c.imag)


def fidelity(a: SpinState, b: SpinState) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return abs(a.overlap(b)) ** 2
