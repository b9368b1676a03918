#!/usr/bin/env python3
"""Time the compiled batch kernels against the numpy fallback.

Prints one CSV row per kernel and batch size with the best-of-N wall time
for each backend and the resulting speedup.  Run from the repo root:

    python3 benchmarks/bench_kernels.py --sizes 1000,10000,100000
"""

import argparse
import sys
import time

import numpy as np

from kinplex.kernels import _fallback

try:
    from kinplex.kernels import _native
except ImportError:
    _native = None


def best_ms(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return 1e3 * best


def workloads(n, rng):
    qs2 = rng.uniform(0.0, 2 * np.pi, (n, 2))
    qs3 = np.column_stack([qs2, rng.uniform(0.0, 1.0, n)])
    qs4 = rng.uniform(0.0, 2 * np.pi, (n, 4))
    theta = np.zeros(4)
    d = np.array([0.3, 0.0, 0.2, 0.0])
    a = np.array([0.8, 0.9, 0.7, 0.5])
    alpha = np.array([np.pi / 2, -np.pi / 2, np.pi / 2, 0.0])
    kinds = np.zeros(4, dtype=np.uint8)
    jac = _fallback.pointing_batch(qs2)[1]
    return [
        ("dh_fk_batch", (theta, d, a, alpha, kinds, np.eye(4), qs4)),
        ("planar_rr_batch", (qs2, 2.0, 1.0)),
        ("pointing_batch", (qs2,)),
        ("scara_batch", (qs3, 2.0, 1.0)),
        ("sv_extremes2_batch", (jac,)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,100000",
                    help="comma-separated batch sizes")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timed runs per cell; the best is reported")
    args = ap.parse_args()

    if _native is None:
        print("compiled backend not importable; timing the fallback only",
              file=sys.stderr)

    rng = np.random.default_rng(0)
    print("kernel,n,fallback_ms,native_ms,speedup")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, call_args in workloads(n, rng):
            fb = best_ms(getattr(_fallback, name), call_args, args.repeat)
            if _native is None:
                print(f"{name},{n},{fb:.3f},,")
                continue
            nat = best_ms(getattr(_native, name), call_args, args.repeat)
            print(f"{name},{n},{fb:.3f},{nat:.3f},{fb / nat:.2f}")


if __name__ == "__main__":
    main()
