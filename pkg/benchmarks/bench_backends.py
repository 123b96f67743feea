"""Compare the compiled kernels against the plain-numpy fallback.

The fallback is selected with RELAYPAIR_DISABLE_NUMBA=1, so this script
re-executes itself once with that variable set and prints both timings.

Usage: python benchmarks/bench_backends.py [--m 8 16 32] [--trials 20]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_suite(m_list, trials):
    import numpy as np

    from relaypair import (IndividualBudgets, RicianConfig,
                           sample_realization, solve_individual, solve_total,
                           waterfill)
    from relaypair._numba import NUMBA_ENABLED

    bud = IndividualBudgets(4.0, 1.0)
    out = {"backend": "numba" if NUMBA_ENABLED else "numpy", "timings": {}}

    def profile(m):
        return RicianConfig(k_factor=1.0, mean_sq_sr=3.0, mean_sq_sd=1.0,
                            mean_sq_rd=3.0, noise_var=1.0, m=m)

    # warm up JIT compilation outside the timed region
    warm = sample_realization(profile(4), 0)
    solve_total(warm, 5.0, seed=0)
    solve_individual(warm, bud, seed=0)

    for m in m_list:
        reals = [sample_realization(profile(m), 1000 + t)
                 for t in range(trials)]
        t0 = time.perf_counter()
        for t, real in enumerate(reals):
            solve_total(real, 5.0, seed=t)
        out["timings"][f"solve_total_m{m}"] = (time.perf_counter() - t0) / trials

        t0 = time.perf_counter()
        for t, real in enumerate(reals):
            solve_individual(real, bud, seed=t)
        out["timings"][f"solve_individual_m{m}"] = (time.perf_counter() - t0) / trials

        rng = np.random.default_rng(7)
        g = rng.uniform(0.01, 5.0, 4 * m)
        w = rng.uniform(0.5, 2.0, 4 * m)
        t0 = time.perf_counter()
        for _ in range(2000):
            waterfill(g, w, 10.0)
        out["timings"][f"waterfill_n{4 * m}"] = (time.perf_counter() - t0) / 2000
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        print(json.dumps(run_suite(args.m, args.trials)))
        return

    results = [run_suite(args.m, args.trials)]
    env = dict(os.environ, RELAYPAIR_DISABLE_NUMBA="1")
    child = subprocess.run(
        [sys.executable, __file__, "--child", "--trials", str(args.trials),
         "--m", *map(str, args.m)],
        env=env, capture_output=True, text=True, check=True)
    results.append(json.loads(child.stdout.strip().splitlines()[-1]))

    keys = list(results[0]["timings"])
    names = [r["backend"] for r in results]
    width = max(len(k) for k in keys)
    print(f"{'benchmark':<{width}}  " + "  ".join(f"{n:>10}" for n in names)
          + "   speedup")
    for k in keys:
        vals = [r["timings"][k] for r in results]
        ratio = vals[1] / vals[0] if vals[0] > 0 else float("inf")
        print(f"{k:<{width}}  "
              + "  ".join(f"{v * 1e3:>8.2f}ms" for v in vals)
              + f"   {ratio:>5.1f}x")


if __name__ == "__main__":
    main()
