"""Timings of the compiled and numpy kernel backends.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. The compiled
backend is skipped (with a note) when the extension has not been built.
"""
import argparse
import timeit

import numpy as np

from schur_interp import _kernels_py, kernels

try:
    from schur_interp import _ckernels
except ImportError:
    _ckernels = None

CASES = [(2, 1, 256), (6, 3, 256), (6, 3, 4096), (20, 4, 1024), (60, 4, 256)]


def make_case(n, m, npts, rng):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A /= 1.1 * np.linalg.norm(A, 2)
    B = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    C = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    D = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    z = 0.95 * np.exp(2j * np.pi * np.arange(npts) / npts)
    return A, B, C, D, z


def best_time(fn, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    impls = [("python", _kernels_py)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled extension not available; timing the numpy backend only")
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'kernel':<14}{'n':>4}{'m':>4}{'points':>8}"
          + "".join(f"{name + ' [ms]':>15}" for name, _ in impls) + f"{'speedup':>10}")
    for n, m, npts in CASES:
        A, B, C, D, z = make_case(n, m, npts, rng)
        runs = {
            "transfer_eval": lambda impl: kernels.transfer_eval(A, B, C, D, z, impl=impl),
            "shifted_solve": lambda impl: kernels.shifted_solve(A, B, 1.0, z, impl=impl),
        }
        for label, run in runs.items():
            ref = run(_kernels_py)
            times = []
            for _, impl in impls:
                out = run(impl)
                assert np.allclose(out, ref, atol=1e-10 * max(1, np.abs(ref).max()))
                times.append(best_time(lambda: run(impl), args.repeat))
            speed = f"{times[0] / times[1]:>9.1f}x" if len(times) > 1 else ""
            print(f"{label:<14}{n:>4}{m:>4}{npts:>8}"
                  + "".join(f"{1e3 * t:>15.3f}" for t in times) + speed)


if __name__ == "__main__":
    main()
