"""Husimi-Q function |<theta, phi|psi>|^2 on the generalized Bloch sphere."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dicke import SpinState, coherent_amplitude_magnitudes


@dataclass(frozen=True)
class HusimiGrid:
    """Husimi values on a Gauss-Legendre (in cos theta) x uniform phi grid.

    ``values[j, k]`` and ``weights[j, k]`` belong to node ``(theta[j], phi[k])``;
    the weights integrate over the unit sphere (they sum to 4 pi).
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    total_spin: float

    @property
    def n_theta(self) -> int:
        return self.theta.size

    @property
    def n_phi(self) -> int:
        return self.phi.size

    def normalization(self) -> float:
        """(2S+1)/(4 pi) * integral of Q; exactly 1 when n_theta >= S+1 and n_phi > 2S."""
        return float((2 * self.total_spin + 1) / (4 * np.pi) * np.sum(self.weights * self.values))

    def rows(self):
        for j, th in enumerate(self.theta):
            for k, ph in enumerate(self.phi):
                yield th, ph, self.weights[j, k], self.values[j, k]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_csv(self, fh)


def write_csv(grid: HusimiGrid, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["theta", "phi", "weight", "value"])
    for row in grid.rows():
        writer.writerow([repr(float(x)) for x in row])


def husimi_grid(state: SpinState, n_theta: int, n_phi: int) -> HusimiGrid:
    if n_theta < 2 or n_phi < 2:
        raise ValueError("n_theta and n_phi must be >= 2")
    system = state.system
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(-x)  # ascending theta
    x, wx = x[order], wx[order]
    theta = np.arccos(x)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi

    mag = coherent_amplitude_magnitudes(system, theta)
    # conj(<m|theta,phi>) = mag_m exp(-i (S - m) phi); index p = S - m runs backwards in m
    coeffs = np.ascontiguousarray((mag * state.amplitudes[None, :])[:, ::-1])
    values = kernels.husimi_phi_sums(coeffs, phi)
    weights = np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi))
    return HusimiGrid(theta=theta, phi=phi, weights=weights, values=values,
                      total_spin=system.total_spin)
