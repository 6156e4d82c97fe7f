"""Time the compiled and pure-Python sweep kernels on the same workload.

    python3 benchmarks/bench_kernels.py [--draws 32] [--points 2401] [--d 3]

Both backends get identical squared profiles, grid and starting point; the
script reports wall time per backend, the speedup, and the largest
difference between the two solutions.
"""
import argparse
import time

import numpy as np

from semimix import kernels
from semimix.montecarlo import ProfileSampler, sample_squared_profiles
from semimix.solver import default_init


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--draws", type=int, default=32)
    p.add_argument("--points", type=int, default=2401)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    sampler = ProfileSampler.iid(args.d, "rayleigh", sigma=1.0)
    a2 = sample_squared_profiles(sampler, 0, range(args.draws))
    xs = np.linspace(-12, 12, args.points)
    init = np.repeat(default_init(args.d)[None], args.draws, axis=0)

    def call(sweep):
        return lambda: sweep(a2, xs, args.epsilon, args.tol, 10 * args.tol, 10000, init)

    results = {}
    for name in ("cython", "python"):
        sweep = kernels.BACKENDS.get(name)
        if sweep is None:
            print(f"{name:>8}: unavailable (extension not built)")
            continue
        secs, out = timed(call(sweep), args.repeat if name != "python" else 1)
        results[name] = (secs, out)
        iters = int(out[1].sum())
        print(f"{name:>8}: {secs:8.3f} s  ({iters} iterations, {iters / secs:.3g} it/s)")

    if len(results) == 2:
        (tc, gc), (tp, gp) = results["cython"], results["python"]
        diff = float(np.max(np.abs(gc[0] - gp[0])))
        same_iters = bool(np.array_equal(gc[1], gp[1]))
        print(f"speedup: {tp / tc:.1f}x   max |g_cython - g_python| = {diff:.2e}   "
              f"identical iteration counts: {same_iters}")


if __name__ == "__main__":
    main()
