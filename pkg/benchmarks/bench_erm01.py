#!/usr/bin/env python3
"""Benchmark the exact 0-1 ERM sweep: compiled Cython kernel vs numpy fallback.

Both backends implement the same candidate enumeration; this script times
them on growing training sets and verifies they return the same minimum loss.

Usage: python benchmarks/bench_erm01.py [--sizes 64,128,256,512,1024] [--reps 5]
"""

import argparse
import time

import numpy as np

from fiprobe._erm01 import erm01_2d_search as pure_search

try:
    from fiprobe._erm01fast import erm01_2d_search as fast_search
except ImportError:
    fast_search = None


def bench(fn, X, y, reps):
    best = float("inf")
    loss = None
    for _ in range(reps):
        t0 = time.perf_counter()
        _, _, loss = fn(X, y)
        best = min(best, time.perf_counter() - t0)
    return best, loss


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,128,256,512,1024")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    if fast_search is None:
        print("compiled kernel not available; showing fallback only")
    print(f"{'n':>6} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}")
    for n in sizes:
        X = rng.normal(size=(n, 2))
        y = rng.integers(0, 2, size=n)
        t_pure, l_pure = bench(pure_search, X, y, args.reps)
        if fast_search is None:
            print(f"{n:>6} {1e3 * t_pure:>12.2f} {'-':>14} {'-':>9}")
            continue
        t_fast, l_fast = bench(fast_search, X, y, args.reps)
        assert l_pure == l_fast, f"loss mismatch at n={n}: {l_pure} vs {l_fast}"
        print(f"{n:>6} {1e3 * t_pure:>12.2f} {1e3 * t_fast:>14.2f} "
              f"{t_pure / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
