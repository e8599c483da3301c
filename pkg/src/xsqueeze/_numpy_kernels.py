"""Pure-numpy reference builds of the hot kernels (see ``kernels``)."""

import numpy as np


def rotate_x(psi, angle, lam, vec, vec_t):
    if angle == 0.0:  # exact identity, not V V^T
        return psi.copy()
    # vec is real: split the complex product to avoid upcasting vec every call
    c = (vec_t @ psi.real + 1j * (vec_t @ psi.imag)) * np.exp(-1j * angle * lam)
    return vec @ c.real + 1j * (vec @ c.imag)


def apply_sx(psi, off):
    out = np.zeros_like(psi)
    out[:-1] += off * psi[1:]
    out[1:] += off * psi[:-1]
    return out


def propagate(psi, params, m2, lam, vec, vec_t):
    out = np.array(psi, dtype=np.complex128)
    for k, p in enumerate(params):
        if k % 2 == 0:
            out = np.exp(-1j * p * m2) * out
        else:
            out = rotate_x(out, p, lam, vec, vec_t)
    return out


def forward_states(psi, params, m2, lam, vec, vec_t):
    states = np.empty((len(params) + 1, psi.shape[0]), dtype=np.complex128)
    states[0] = psi
    for k, p in enumerate(params):
        if k % 2 == 0:
            states[k + 1] = np.exp(-1j * p * m2) * states[k]
        else:
            states[k + 1] = rotate_x(states[k], p, lam, vec, vec_t)
    return states


def infidelity_and_gradient(psi0, target, params, m2, off, lam, vec, vec_t):
    fwd = forward_states(psi0, params, m2, lam, vec, vec_t)
    eta = np.vdot(target, fwd[-1])
    eps = 1.0 - abs(eta) ** 2
    grad = np.empty(len(params))
    chi = target.copy()
    for k in range(len(params) - 1, -1, -1):
        if k % 2 == 0:
            d_eta = -1j * np.vdot(chi, m2 * fwd[k + 1])
            chi = np.exp(1j * params[k] * m2) * chi
        else:
            d_eta = -1j * np.vdot(chi, apply_sx(fwd[k + 1], off))
            chi = rotate_x(chi, -params[k], lam, vec, vec_t)
        grad[k] = -2.0 * (np.conj(eta) * d_eta).real
    return eps, grad


def husimi_phi_sums(coeffs, phis):
    """|sum_p coeffs[j, p] exp(-i p phi_k)|^2 for every (theta_j, phi_k).

    Uniform grids ``phi_k = 2 pi k / n_phi`` go through an FFT after folding
    ``p`` modulo ``n_phi``; anything else falls back to a dense phase matrix.
    """
    n_theta, dim = coeffs.shape
    n_phi = phis.shape[0]
    uniform = np.allclose(phis, 2.0 * np.pi * np.arange(n_phi) / n_phi, rtol=0.0, atol=1e-14)
    if not uniform:
        amp = coeffs @ np.exp(-1j * np.outer(np.arange(dim), phis))
        return amp.real ** 2 + amp.imag ** 2
    folded = np.zeros((n_theta, n_phi), dtype=np.complex128)
    for start in range(0, dim, n_phi):
        block = coeffs[:, start:start + n_phi]
        folded[:, :block.shape[1]] += block
    amp = np.fft.fft(folded, axis=1)
    return amp.real ** 2 + amp.imag ** 2
