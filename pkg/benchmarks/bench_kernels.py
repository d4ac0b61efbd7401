"""Benchmark the compiled Dykstra kernels against the numpy fallback.

The sweep kernel is the hot loop of every tight-gap inner solve, so this
is the comparison that justifies shipping the extension.  Run as

    python benchmarks/bench_kernels.py [--sweeps 20000] [--sizes 8,30,100]
"""

import argparse
import time

import numpy as np

from inexact_pg._kernels import _dykstra_py

try:
    from inexact_pg._kernels import _dykstra_cy
except ImportError:
    _dykstra_cy = None


def time_backend(impl, n, sweeps, with_gap):
    rng = np.random.default_rng(0)
    y = rng.standard_normal((n, n))
    x = y.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    t0 = time.perf_counter()
    for _ in range(sweeps):
        impl.sweep_rowcol(x, p, q, 0.01, 0.01)
        if with_gap:
            impl.dual_gap_rowcol(x, p, q, y, 1.0, 0.01, 0.01)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sweeps", type=int, default=20000)
    ap.add_argument("--sizes", default="8,30,100")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = [("python", _dykstra_py)]
    if _dykstra_cy is not None:
        backends.append(("cython", _dykstra_cy))
    else:
        print("compiled extension not built; benchmarking fallback only")

    print(f"{args.sweeps} sweeps per measurement (sweep+gap = one inner "
          "iteration with a per-sweep gap check)\n")
    print(f"{'size':>6} {'mode':>10}", *(f"{name:>12}" for name, _ in backends),
          f"{'speedup':>9}" if len(backends) == 2 else "")
    for n in sizes:
        for with_gap, mode in ((False, "sweep"), (True, "sweep+gap")):
            times = [time_backend(impl, n, args.sweeps, with_gap)
                     for _, impl in backends]
            row = [f"{n:>6} {mode:>10}"]
            row += [f"{t / args.sweeps * 1e6:>10.2f}us" for t in times]
            if len(times) == 2:
                row.append(f"{times[0] / times[1]:>8.1f}x")
            print(*row)


if __name__ == "__main__":
    main()
