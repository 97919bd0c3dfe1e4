"""Compiled vs pure-Python kernels on the three hot paths.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints the best-of-N wall time per task and backend, the speed-up, and the
largest difference between the two backends' results.
"""

import argparse
import math
import time

from equistab import _backend, _pykernels, sturm
from equistab.problems import jacobi_coefficients, make_problem


def tasks():
    spec = make_problem("sphere", 2, 2, 2, 1)
    co = jacobi_coefficients(spec, "identity")
    params = list(co.params)
    shoot_spec = make_problem("sphere", 1, 3, 3, 1)
    shoot_params = [1.0, 3.0, 3.0, shoot_spec.target, 0.0, 1.0, 1.0, -1.0]
    a0 = 20.0 * math.exp(-12.0)

    def pruefer(mod):
        return [mod.pruefer_match(co.model, params, co.prof_r, co.prof_dr, lam, -12.0, 12.0, 0.0,
                                  math.pi / 4, 3 * math.pi / 4, sturm.RK_TOL, sturm.HMAX)[0]
                for lam in (0.5, 5.0, 20.0, 50.0)]

    def harmonic(mod):
        return list(mod.rk_until(_backend.SPHERE_IDENTITY, shoot_params, co.prof_r, co.prof_dr,
                                 _backend.HARMONIC, 0.0, -12.0, 12.0, [a0, a0], 1e-12, 0.1, 4.0)[1])

    def linear(mod):
        import numpy as np
        grid = np.linspace(-12.0, 12.0, 2401)
        Y, _, _ = mod.rk_grid(co.model, params, co.prof_r, co.prof_dr, _backend.LINEAR, 6.0, grid,
                              [1e-5, 1e-5], sturm.RK_TOL, sturm.HMAX)
        return list(Y[-1])

    return {"pruefer (4 shots)": pruefer, "harmonic shot": harmonic, "linear on grid": linear}


def best_time(fn, mod, repeat):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(mod)
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        compiled = _backend.get("cython")
    except ImportError:
        compiled = None
    if compiled is None:
        print("compiled kernels not built; only the pure-Python backend is available")
    print(f"{'task':<20}{'python [s]':>12}{'cython [s]':>12}{'speed-up':>10}{'max |diff|':>12}")
    for name, fn in tasks().items():
        tp, outp = best_time(fn, _pykernels, args.repeat)
        if compiled is None:
            print(f"{name:<20}{tp:>12.4f}{'-':>12}{'-':>10}{'-':>12}")
            continue
        tc, outc = best_time(fn, compiled, args.repeat)
        diff = max(abs(a - b) for a, b in zip(outp, outc))
        print(f"{name:<20}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
