"""Timing comparison of the jitted kernels against the pure-numpy fallback.

Runs both code paths in one process by reloading edgeoff.kernels with
EDGEOFF_NO_NUMBA toggled, so results come from the exact modules users get.

    python3 benchmarks/bench_kernels.py [--sizes 1000 10000 100000]
"""

import argparse
import importlib
import os
import sys
import time

import numpy as np


def _load_kernels(no_numba):
    os.environ["EDGEOFF_NO_NUMBA"] = "1" if no_numba else "0"
    import edgeoff.kernels as k

    return importlib.reload(k)


def _time(fn, repeats=20):
    fn()  # warm-up (JIT compilation, cache effects)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, grid):
    rng = np.random.default_rng(0)
    rows = []
    for no_numba in (False, True):
        k = _load_kernels(no_numba)
        label = "numpy" if no_numba else "numba"
        for n in sizes:
            rewards = rng.uniform(size=n)
            next_values = rng.standard_normal(n)
            dones = (rng.uniform(size=n) < 0.01).astype(np.float64)
            t = _time(lambda: k.lambda_returns(rewards, next_values, dones, 0.99, 0.95))
            rows.append((f"lambda_returns[T={n}]", label, t))

            w = rng.standard_normal(n)
            a_grid = np.linspace(w.min(), 0.0, grid)
            b_grid = np.linspace(0.0, w.max(), grid)
            t = _time(lambda: k.quant_grid_errors(w, 4, a_grid, b_grid), repeats=5)
            rows.append((f"quant_grid_errors[n={n},grid={grid}]", label, t))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    ap.add_argument("--grid", type=int, default=32)
    args = ap.parse_args()

    rows = bench(args.sizes, args.grid)
    by_case = {}
    for case, label, t in rows:
        by_case.setdefault(case, {})[label] = t
    print(f"{'kernel':42s} {'numba':>12s} {'numpy':>12s} {'speedup':>8s}")
    for case, res in by_case.items():
        speedup = res["numpy"] / res["numba"]
        print(f"{case:42s} {res['numba']:12.6f} {res['numpy']:12.6f} {speedup:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
