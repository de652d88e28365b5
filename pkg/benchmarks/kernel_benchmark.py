#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Runs the hot loops (basin classification, raster rows, pinned-cycle
classification, Birkhoff sums, separated-set greedy) on identical inputs
with both backends, reports wall times and the speedup, and asserts that
the outputs are bit-identical.

Usage: python benchmarks/kernel_benchmark.py [--quick]
"""

import argparse
import time

import numpy as np

from kanlab import _kernels_py

try:
    from kanlab import _kernels
except ImportError:
    _kernels = None

from kanlab.skew import kan1994


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    if _kernels is None:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")

    sys_ = kan1994()
    kp = sys_.kernel_params()
    rng = np.random.default_rng(12345)
    scale = 0.2 if args.quick else 1.0

    npts = int(400 * scale)
    nmax = int(40000 * scale)
    thetas = rng.random(npts)
    ts = rng.random(npts)

    cyc = np.array([1.0 / 8, 3.0 / 8])
    cvals = np.ascontiguousarray(sys_.fiber.coupling(cyc))

    n_sep = 6 if args.quick else 7
    lam = sys_.base.expansion_bound()
    n_theta = int(np.ceil(4.0 * lam ** (n_sep - 1) / 0.05)) + 1
    window = 0.05 * lam ** (-(n_sep - 1))

    cases = [
        ("classify_block", "classify_block", (kp, thetas, ts, nmax, 1e-6, 50)),
        ("raster_rows 64x8", "raster_rows", (kp, 64, 64, 0, 8, nmax, 1e-6, 50)),
        ("classify_pinned", "classify_pinned", (cvals, kp[4], kp[7], kp[8], 0.25, 40 * nmax, 1e-6, 50)),
        ("birkhoff_batches", "birkhoff_batches", (kp, 0.61803398875, 1e-9, 1000, 20, int(20000 * scale))),
        (f"sep_greedy_cylinder n={n_sep}", "sep_greedy_cylinder", (kp, n_sep, 0.05, n_theta, 80, window, 1500)),
        (f"sep_greedy_base n={n_sep}", "sep_greedy_base", (kp, n_sep, 0.05, n_theta, window, 256)),
    ]

    print(f"{'kernel':<28} {'cython':>10} {'python':>10} {'speedup':>9}  identical")
    for label, fname, fargs in cases:
        tc, out_c = timed(getattr(_kernels, fname), *fargs)
        tp, out_p = timed(getattr(_kernels_py, fname), *fargs)
        ok = same(out_c, out_p)
        print(f"{label:<28} {tc:>9.3f}s {tp:>9.3f}s {tp / tc:>8.1f}x  {ok}")
        if not ok:
            raise SystemExit(f"backend mismatch in {label}")


if __name__ == "__main__":
    main()
