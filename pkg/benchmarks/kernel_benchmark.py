"""Benchmark the dead-time filter kernel: compiled versus pure Python.

Generates a realistic event stream (Poisson arrivals split over two
detectors with SPAD-like dead times), runs both backend implementations
on identical input, checks the outputs match bit for bit, and reports
throughput.

Usage: python3 benchmarks/kernel_benchmark.py [n_events]
"""

import sys
import time

import numpy as np

from siqkd._kernel import _deadtime_py
from siqkd._kernel import _deadtime_cy


def make_events(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    times = np.sort(rng.exponential(1e-6, size=n).cumsum()
                    + rng.random(n) * 0.0)
    detectors = rng.integers(0, 2, size=n).astype(np.int64)
    dead = np.array([10e-6, 10e-6])
    return np.ascontiguousarray(times), detectors, dead


def bench(fn, times, detectors, dead, repeats: int = 5):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(times, detectors, dead, 2)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    times, detectors, dead = make_events(n)
    keep_py, t_py = bench(_deadtime_py.deadtime_filter,
                          times, detectors, dead)
    keep_cy, t_cy = bench(_deadtime_cy.deadtime_filter,
                          times, detectors, dead)
    if not np.array_equal(np.asarray(keep_py), np.asarray(keep_cy)):
        print("MISMATCH between backends")
        return 1
    kept = int(np.count_nonzero(keep_py))
    print(f"events: {n}, kept after dead time: {kept}")
    print(f"pure python: {t_py:.4f} s  ({n / t_py / 1e6:.2f} Mevents/s)")
    print(f"cython:      {t_cy:.4f} s  ({n / t_cy / 1e6:.2f} Mevents/s)")
    print(f"speedup:     {t_py / t_cy:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
