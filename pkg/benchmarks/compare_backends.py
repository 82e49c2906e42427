"""Time the compiled kernels against the pure-Python fallback.

Runs each zero-skipping operator on a few suite geometries with both backends,
checks that the outputs are bitwise identical and prints a CSV table with the
mean time per backend and the speed-up.

    python benchmarks/compare_backends.py --suite paper-3x3 --cases 4 5 6 7 --reps 3
"""
import argparse
import csv
import sys
import time

import numpy as np

from cks import backend, gemm, ops
from cks.bench import SUITES, suite_geometries


def operators(g):
    return {
        "conv_v2": lambda x, w, dy, b: ops.conv_v2(x, w, g, backend_name=b),
        "gemm_conv2d": lambda x, w, dy, b: gemm.gemm_conv2d(x, w, g, backend_name=b),
        "ks_deconv_v2": lambda x, w, dy, b: ops.ks_deconv_v2(dy, w, g, backend_name=b),
        "sk_dilated_v2": lambda x, w, dy, b: ops.sk_dilated_v2(x, dy, g, backend_name=b),
    }


def timed(fn, reps):
    fn()
    start = time.perf_counter()
    for _ in range(reps):
        out = fn()
    return (time.perf_counter() - start) / reps, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--suite", choices=list(SUITES), default="paper-3x3")
    parser.add_argument("--cases", type=int, nargs="+", default=[4, 5, 6, 7])
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--dtype", choices=["f32", "f64"], default="f64")
    args = parser.parse_args(argv)
    if "cython" not in backend.available():
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    dt = np.float32 if args.dtype == "f32" else np.float64
    geoms = suite_geometries(args.suite)
    writer = csv.writer(sys.stdout)
    writer.writerow(["case", "geometry", "op", "cython_s", "python_s", "speedup", "identical"])
    rng = np.random.default_rng(0)
    for i in args.cases:
        g = geoms[i]
        x = rng.uniform(-1, 1, g.x_shape).astype(dt)
        w = rng.uniform(-1, 1, g.w_shape).astype(dt)
        dy = rng.uniform(-1, 1, g.y_shape).astype(dt)
        for name, fn in operators(g).items():
            tc, (oc, _) = timed(lambda: fn(x, w, dy, "cython"), args.reps)
            tp, (op, _) = timed(lambda: fn(x, w, dy, "python"), args.reps)
            writer.writerow([i, g.describe(), name, f"{tc:.6f}", f"{tp:.6f}", f"{tp / tc:.1f}",
                             np.array_equal(oc, op)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
