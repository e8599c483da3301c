"""numba builds of the hot kernels (see ``kernels``)."""

import numpy as np
from numba import njit


@njit(cache=True)
def rotate_x(psi, angle, lam, vec, vec_t):
    if angle == 0.0:
        return psi.copy()
    re = vec_t @ np.ascontiguousarray(psi.real)
    im = vec_t @ np.ascontiguousarray(psi.imag)
    c = (re + 1j * im) * np.exp(-1j * angle * lam)
    return (vec @ np.ascontiguousarray(c.real)) + 1j * (vec @ np.ascontiguousarray(c.imag))


@njit(cache=True)
def apply_sx(psi, off):
    dim = psi.shape[0]
    out = np.zeros(dim, dtype=np.complex128)
    for i in range(dim - 1):
        out[i] += off[i] * psi[i + 1]
        out[i + 1] += off[i] * psi[i]
    return out


@njit(cache=True)
def propagate(psi, params, m2, lam, vec, vec_t):
    out = psi.astype(np.complex128)
    for k in range(params.shape[0]):
        if k % 2 == 0:
            out = np.exp(-1j * params[k] * m2) * out
        else:
            out = rotate_x(out, params[k], lam, vec, vec_t)
    return out


@njit(cache=True)
def forward_states(psi, params, m2, lam, vec, vec_t):
    n = params.shape[0]
    states = np.empty((n + 1, psi.shape[0]), dtype=np.complex128)
    states[0] = psi
    for k in range(n):
        if k % 2 == 0:
            states[k + 1] = np.exp(-1j * params[k] * m2) * states[k]
        else:
            states[k + 1] = rotate_x(states[k], params[k], lam, vec, vec_t)
    return states


@njit(cache=True)
def infidelity_and_gradient(psi0, target, params, m2, off, lam, vec, vec_t):
    n = params.shape[0]
    fwd = forward_states(psi0, params, m2, lam, vec, vec_t)
    eta = np.vdot(target, fwd[n])
    eps = 1.0 - (eta.real * eta.real + eta.imag * eta.imag)
    grad = np.empty(n)
    chi = target.copy()
    for k in range(n - 1, -1, -1):
        # chi holds U_n^dag ... U_{k+1}^dag |target>, paired with fwd[k + 1]
        if k % 2 == 0:
            d_eta = -1j * np.vdot(chi, m2 * fwd[k + 1])
            chi = np.exp(1j * params[k] * m2) * chi
        else:
            d_eta = -1j * np.vdot(chi, apply_sx(fwd[k + 1], off))
            chi = rotate_x(chi, -params[k], lam, vec, vec_t)
        grad[k] = -2.0 * (np.conj(eta) * d_eta).real
    return eps, grad
