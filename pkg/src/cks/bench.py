"""Timing tables for the three conv-layer operators at desk scale."""
import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass

import numpy as np

from . import gemm, oracle, ops
from .geometry import ConvGeometry, GzPolicy, flops, select_gz
from .tensor import as_dtype

# (spatial size, channels, batch): maps shrink while channels and batch grow
_SCHEDULE = ((64, 8, 1), (48, 8, 2), (32, 16, 2), (24, 16, 4),
             (16, 32, 4), (12, 32, 8), (8, 64, 8), (4, 64, 16))
SUITES = {"paper-3x3": (3, 1), "paper-5x5": (5, 2)}
STRIDE = 2


def suite_geometries(name):
    f, p = SUITES[name]
    return [ConvGeometry.square(n, i, c, c, f, s=STRIDE, p=p) for i, c, n in _SCHEDULE]


def load_geometries(path):
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = [data]
    return [ConvGeometry.from_dict(d) for d in data]


@dataclass(frozen=True)
class BenchCase:
    index: int
    geometry: ConvGeometry
    op: str
    reps: int = 10
    dtype: str = "f32"

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("repetitions must be >= 1")


def _impls(op, g, nthreads, deterministic, backend_name):
    kw = {"nthreads": nthreads, "backend_name": backend_name}
    if op == "conv":
        return {
            "naive": lambda x, w, dy: oracle.naive_conv2d(x, w, g),
            "cks": lambda x, w, dy: ops.conv_v2(x, w, g, **kw),
            "gemm": lambda x, w, dy: gemm.gemm_conv2d(x, w, g, **kw),
        }
    if op == "deconv":
        return {
            "naive": lambda x, w, dy: oracle.naive_deconv2d(dy, w, g),
            "cks": lambda x, w, dy: ops.ks_deconv(dy, ops.ks_split(w, g), g, **kw),
            "cks_v2": lambda x, w, dy: ops.ks_deconv_v2(dy, ops.ks_split(w, g), g, **kw),
        }
    # output sizes of conv, deconv and dilated stand in for their block counts
    gz = select_gz(g.n * g.oh * g.ow * g.oc, g.n * g.ih * g.iw * g.ic, g.oc * g.fh * g.fw * g.ic,
                   GzPolicy(1, max(1, min(nthreads, g.n * g.oh * g.ow))))
    return {
        "naive": lambda x, w, dy: oracle.naive_dilated_conv2d(x, dy, g),
        "cks": lambda x, w, dy: ops.sk_dilated(x, dy, g, **kw),
        "cks_v2": lambda x, w, dy: ops.sk_dilated_v2(x, dy, g, **kw),
        "gemm": lambda x, w, dy: gemm.partitioned_dilated(
            x, dy, g, gz, deterministic=deterministic, **kw),
    }


def checksum(arr):
    return hashlib.sha256(np.ascontiguousarray(arr).tobytes()).hexdigest()[:16]


def run_case(case, seed=0, nthreads=1, deterministic=True, backend_name=None):
    g, dt = case.geometry, as_dtype(case.dtype)
    rng = np.random.default_rng(seed + case.index)
    x = rng.uniform(-1, 1, g.x_shape).astype(dt)
    w = rng.uniform(-1, 1, g.w_shape).astype(dt)
    dy = rng.uniform(-1, 1, g.y_shape).astype(dt)
    rows = []
    for impl, fn in _impls(case.op, g, nthreads, deterministic, backend_name).items():
        out, st = fn(x, w, dy)  # warm-up
        start = time.perf_counter()
        for _ in range(case.reps):
            fn(x, w, dy)
        mean = (time.perf_counter() - start) / case.reps
        fl = flops(g, case.op)
        rows.append({
            "case": case.index, "op": case.op, "impl": impl, **g.to_dict(),
            "dtype": case.dtype, "reps": case.reps, "mean_time_s": mean,
            "flops": fl, "flops_no_batch": flops(g, case.op, include_batch=False),
            "gflops": fl / (mean * 1e9), "macs": st.macs, "zeros_skipped": st.zeros_skipped,
            "checksum": checksum(out),
        })
    return rows


def cmd_bench(suite="paper-3x3", op="all", reps=10, dtype="f32", nthreads=1,
              deterministic=False, geometries=None, seed=0, backend_name=None, cases=None):
    """Run a suite; returns report rows (dicts)."""
    if suite == "custom":
        if not geometries:
            raise ValueError("the custom suite needs a geometry file")
        gs = geometries
    elif suite in SUITES:
        gs = suite_geometries(suite)
    else:
        raise ValueError(f"unknown suite {suite!r}")
    indices = range(len(gs)) if cases is None else cases
    op_names = ("conv", "deconv", "dilated") if op == "all" else (op,)
    rows = []
    for i in indices:
        g = gs[i]
        for name in op_names:
            case = BenchCase(i, g, name, reps, dtype)
            rows.extend(run_case(case, seed, nthreads, deterministic, backend_name))
    return rows


TIMING_COLUMNS = ("mean_time_s", "gflops")


def format_rows(rows, fmt="csv"):
    if fmt == "json":
        return json.dumps(rows, indent=2)
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()
