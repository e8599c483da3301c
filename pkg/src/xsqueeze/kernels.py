"""Backend selection for the hot kernels.

The numba build is used unless numba cannot be imported or the environment
variable ``XSQUEEZE_DISABLE_NUMBA`` is truthy (``1``, ``true``, ``yes``,
``on``) at import time.  Both builds share one calling convention:

* states are complex128 vectors in the Dicke basis, ``m`` ascending;
* ``params`` alternate OAT shears and x-rotation angles, starting with a
  shear: ``[Q1, mu2, Q3, mu4, ...]``;
* ``lam, vec, vec_t`` is the eigendecomposition of S_x, with ``vec_t`` a
  C-contiguous copy of ``vec.T``.

The Husimi phase sums always go through numpy's FFT; a compiled direct
sum is O(N) per grid node and loses to it beyond N of a few tens.
"""

import os

from . import _numpy_kernels

_FLAG = os.environ.get("XSQUEEZE_DISABLE_NUMBA", "").strip().lower()

if _FLAG in ("1", "true", "yes", "on"):
    _impl = _numpy_kernels
else:
    try:
        from . import _numba_kernels as _impl
    except ImportError:  # pragma: no cover
        _impl = _numpy_kernels

BACKEND = "numpy" if _impl is _numpy_kernels else "numba"

rotate_x = _impl.rotate_x
apply_sx = _impl.apply_sx
propagate = _impl.propagate
forward_states = _impl.forward_states
infidelity_and_gradient = _impl.infidelity_and_gradient
husimi_phi_sums = _numpy_kernels.husimi_phi_sums
