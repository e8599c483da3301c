"""Extreme spin-squeezed states and the OAT/rotation pulse sequences that make them.

Submodules
----------
dicke
    Collective spin operators, coherent states, rotations, variances.
extreme
    Ground-state construction of extreme squeezed states at fixed contrast.
metrology
    Wineland parameter, scattering loss model and Ramsey readout.
pulses
    Pulse sequences, propagation, adjoint gradients and the cavity echo check.
optimize
    Multi-start optimization of pulse sequences (free or fixed total shear).
scaling
    Sweeps over N and shear, power-law fits, sweep tables.
husimi
    Husimi-Q function on Gauss-Legendre grids.
"""

__version__ = "0.1.0"

from .dicke import (Direction, SpinState, SpinSystem, build_system,
                    coherent_state, dicke_state, expectation, fidelity,
                    mean_spin_vector, min_perpendicular_variance, rotate,
                    variance)
from .errors import (DegenerateDirectionError, DivergentSensitivityError,
                     UnreachableContrastError, XSqueezeError)
from .extreme import ExtremeSolution, ground_state, solve_extreme
from .husimi import HusimiGrid, husimi_grid
from .kernels import BACKEND
from .metrology import (LossModel, MetrologyReport, contrast_loss,
                        corrected_xi2, gain_db, orient_for_readout,
                        ramsey_sensitivity, wineland_xi2)
from .optimize import (OptimizationConfig, OptimizedSequence, optimize,
                       optimize_fixed_shear, optimize_free)
from .pulses import (CavityEchoSpec, PulseSequence, echo_oat,
                     infidelity, infidelity_gradient, initial_css, propagate)
from .scaling import (PowerLawFit, SweepRow, SweepTable, power_law_fit,
                      sweep_extreme_scaling, sweep_gain_vs_shear,
                      sweep_oat_scaling)

__all__ = [
    "BACKEND", "CavityEchoSpec", "DegenerateDirectionError", "Direction",
    "DivergentSensitivityError", "ExtremeSolution", "HusimiGrid", "LossModel",
    "MetrologyReport", "OptimizationConfig", "OptimizedSequence", "PowerLawFit",
    "PulseSequence", "SpinState", "SpinSystem", "SweepRow", "SweepTable",
    "UnreachableContrastError", "XSqueezeError", "build_system",
    "coherent_state", "contrast_loss", "corrected_xi2", "dicke_state",
    "echo_oat", "expectation", "fidelity", "gain_db", "ground_state",
    "husimi_grid", "infidelity", "infidelity_gradient", "initial_css",
    "mean_spin_vector", "min_perpendicular_variance", "optimize",
    "optimize_fixed_shear", "optimize_free", "orient_for_readout",
    "power_law_fit", "propagate", "ramsey_sensitivity", "rotate",
    "solve_extreme", "sweep_extreme_scaling", "sweep_gain_vs_shear",
    "sweep_oat_scaling", "variance", "wineland_xi2",
]
