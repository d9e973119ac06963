"""Micro-benchmark: numba-compiled kernels vs the pure-python fallback.

Run with:

    python benchmarks/bench_kernels.py

Set VOICEHR_NO_NUMBA=1 to confirm the package still imports (and this
script still runs) without the compiled path; in that mode both columns
report the fallback.
"""

import time

import numpy as np

from voicehr._kernels import (
    USING_NUMBA,
    _best_split_scan_py,
    _refractory_select_py,
    best_split_scan,
    refractory_select,
)


def timeit(fn, *args, repeats=200):
    fn(*args)  # warm-up (triggers JIT compilation on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    rng = np.random.default_rng(0)

    n = 20_000
    values = np.sort(rng.normal(0.0, 1.0, n))
    targets = (values + rng.normal(0.0, 0.5, n) > 0).astype(float)

    candidates = np.cumsum(rng.integers(20, 400, 5_000)).astype(np.int64)
    strength = rng.uniform(0.0, 1.0, candidates.size)

    cases = [
        ("best_split_scan", best_split_scan, _best_split_scan_py,
         (values, targets, 5)),
        ("refractory_select", refractory_select, _refractory_select_py,
         (candidates, strength, 100)),
    ]

    print(f"active path: {'numba' if USING_NUMBA else 'pure python'}")
    print(f"{'kernel':<20} {'active':>12} {'fallback':>12} {'speedup':>9}")
    for name, active, fallback, args in cases:
        t_active = timeit(active, *args)
        t_fallback = timeit(fallback, *args)
        print(f"{name:<20} {t_active * 1e6:>10.1f}us {t_fallback * 1e6:>10.1f}us"
              f" {t_fallback / t_active:>8.1f}x")


if __name__ == "__main__":
    main()
