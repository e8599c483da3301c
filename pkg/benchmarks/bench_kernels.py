"""Time the numba and pure-numpy kernel builds against each other.

The backend is fixed at import time by XSQUEEZE_DISABLE_NUMBA, so each
backend runs in its own interpreter.  Usage::

    python3 benchmarks/bench_kernels.py [--atoms 20 60 200 350] [--repeat 200]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

WORKER = r"""
import json, sys, timeit
import numpy as np
from xsqueeze import kernels
from xsqueeze.dicke import build_system
from xsqueeze.extreme import solve_extreme
from xsqueeze.pulses import infidelity_and_gradient, initial_css, propagate, PulseSequence

atoms, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
out = {"backend": kernels.BACKEND, "results": []}
for n in atoms:
    system = build_system(n)
    psi0 = initial_css(system)
    target = solve_extreme(system, 0.9).state
    params = rng.uniform(-0.3, 0.3, 6)
    seq = PulseSequence.from_params(params)
    # warm-up (triggers JIT or cache load)
    infidelity_and_gradient(psi0, params, target)
    propagate(psi0, seq)
    timings = {}
    for name, fn, reps in (
        ("propagate", lambda: propagate(psi0, seq), repeat),
        ("gradient", lambda: infidelity_and_gradient(psi0, params, target), repeat),
    ):
        best = min(timeit.repeat(fn, number=reps, repeat=3)) / reps
        timings[name] = best
    out["results"].append({"n_atoms": n, **timings})
print(json.dumps(out))
"""


def run_backend(disable_numba: bool, atoms, repeat) -> dict:
    env = dict(os.environ, XSQUEEZE_DISABLE_NUMBA="1" if disable_numba else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, json.dumps(atoms), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--atoms", type=int, nargs="+", default=[20, 60, 200, 350])
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args(argv)

    numba_res = run_backend(False, args.atoms, args.repeat)
    numpy_res = run_backend(True, args.atoms, args.repeat)
    if numba_res["backend"] != "numba":
        print("numba unavailable, both runs used the numpy build", file=sys.stderr)

    header = f"{'N':>5} {'kernel':>10} {'numba [us]':>12} {'numpy [us]':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for a, b in zip(numba_res["results"], numpy_res["results"]):
        for name in ("propagate", "gradient"):
            ta, tb = a[name] * 1e6, b[name] * 1e6
            print(f"{a['n_atoms']:>5} {name:>10} {ta:>12.1f} {tb:>12.1f} {tb / ta:>8.2f}")


if __name__ == "__main__":
    main()
