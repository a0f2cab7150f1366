"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from kext import _backend
from kext.dynsys import SQRT38, initial_state
from kext.periods import _kernel_args
from kext.separation import QuinticPolynomial


def _cases():
    s0 = initial_state(SQRT38).as_array()
    P = QuinticPolynomial(0.3)
    quad_args = _kernel_args(P, "zero", "half", 0)
    P2 = QuinticPolynomial(1e-4)
    hard_args = _kernel_args(P2, "zero", "half", 0)
    return {
        "dop853 y=50 tol=1e-10": lambda k: k.dop853(s0, 0.0, 50.0, 1e-10, 1e-12, 1e-2, 10**6),
        "dop853 y=50 tol=1e-13": lambda k: k.dop853(s0, 0.0, 50.0, 1e-13, 1e-15, 1e-3, 10**6),
        "T_u p=0.3": lambda k: k.hyperelliptic_quad(*quad_args, 1e-13, 1e-15, 4000),
        "T_u p=1e-4": lambda k: k.hyperelliptic_quad(*hard_args, 1e-13, 1e-15, 4000),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = _backend.available()
    print(f"backends: {', '.join(names)}")
    print(f"{'case':<26}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")
    for case, fn in _cases().items():
        times = {}
        results = {}
        for n in names:
            k = _backend.get(n)
            results[n] = fn(k)
            number = 1
            t = min(timeit.repeat(lambda: fn(k), number=number, repeat=args.repeat))
            times[n] = t / number
        line = f"{case:<26}" + "".join(f"{times[n] * 1e3:>12.3f}ms" for n in names)
        if len(names) == 2:
            line += f"{times['python'] / times['cython']:>9.1f}x"
            a, b = results["cython"], results["python"]
            # step sequences may branch on rounding of the error estimate,
            # so integrators are compared at the common end point
            va = np.asarray(a[1][-1] if case.startswith("dop") else a[0])
            vb = np.asarray(b[1][-1] if case.startswith("dop") else b[0])
            diff = float(np.max(np.abs(va - vb)))
            line += f"   max|diff| = {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
