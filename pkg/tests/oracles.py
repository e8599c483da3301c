"""Dense reference implementations, written independently of the package."""

import numpy as np
from scipy.linalg import expm
from scipy.special import comb


def dense_ops(n_atoms):
    S = n_atoms / 2
    m = np.arange(-S, S + 1)
    off = 0.5 * np.sqrt(S * (S + 1) - m[:-1] * (m[:-1] + 1))
    sx = np.diag(off, 1) + np.diag(off, -1)
    sy = 1j * np.diag(off, 1) - 1j * np.diag(off, -1)
    sz = np.diag(m)
    return S, m, sx, sy, sz


def dense_css(n_atoms, theta, phi):
    S = n_atoms / 2
    m = np.arange(-S, S + 1)
    return (np.sqrt(comb(n_atoms, S + m)) * np.cos(theta / 2) ** (S + m)
            * np.sin(theta / 2) ** (S - m) * np.exp(1j * (S - m) * phi))


def dense_propagate(n_atoms, psi, params):
    S, m, sx, sy, sz = dense_ops(n_atoms)
    for k, p in enumerate(params):
        gen = sz @ sz if k % 2 == 0 else sx
        psi = expm(-1j * p * gen) @ psi
    return psi


def dense_xi2(n_atoms, psi):
    """Wineland parameter by brute force over perpendicular directions."""
    S, m, sx, sy, sz = dense_ops(n_atoms)
    ops = (sx, sy, sz)
    mean = np.array([np.vdot(psi, o @ psi).real for o in ops])
    n = mean / np.linalg.norm(mean)
    a = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(n, a)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    best = np.inf
    for t in np.linspace(0, np.pi, 20001):
        d = np.cos(t) * u + np.sin(t) * v
        op = sum(c * o for c, o in zip(d, ops))
        var = np.vdot(psi, op @ op @ psi).real - np.vdot(psi, op @ psi).real ** 2
        best = min(best, var)
    return n_atoms * best / (mean @ mean)


def random_state_amplitudes(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
