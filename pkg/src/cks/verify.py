"""Randomized equivalence sweep of every zero-skipping operator against the oracles."""
import numpy as np

from . import gemm, oracle, ops
from .geometry import ConvGeometry, GeometryError, nonzero_calc_fraction

FILTER_SIZES = (1, 2, 3, 5, 7)
CHANNELS = (1, 3, 4)

# name -> (family, callable); partitioned_dilated also takes a segment count
OPERATORS = {
    "conv_v2": ("conv", ops.conv_v2),
    "gemm_conv2d": ("conv", gemm.gemm_conv2d),
    "ks_deconv": ("deconv", ops.ks_deconv),
    "ks_deconv_v2": ("deconv", ops.ks_deconv_v2),
    "sk_dilated": ("dilated", ops.sk_dilated),
    "sk_dilated_v2": ("dilated", ops.sk_dilated_v2),
    "partitioned_dilated": ("dilated", gemm.partitioned_dilated),
}

F32_TOL = 1e-5
ADJOINT_TOL = 1e-10
PARTITION_TOL = 1e-12


def random_geometry(rng, sizes=(4, 12), filters=FILTER_SIZES, strides=(1, 4), max_pad=3,
                    channels=CHANNELS, batches=(1, 2)):
    """Draw a valid geometry; height and width parameters are drawn independently."""
    while True:
        dims = []
        for _ in range(2):
            i = int(rng.integers(sizes[0], sizes[1] + 1))
            f = int(rng.choice(filters))
            s = int(rng.integers(strides[0], strides[1] + 1))
            p = int(rng.integers(0, min(max_pad, f - 1) + 1))
            dims.append((i, f, s, p))
        (ih, fh, sh, ph), (iw, fw, sw, pw) = dims
        try:
            return ConvGeometry(int(rng.choice(batches)), ih, iw, int(rng.choice(channels)),
                                int(rng.choice(channels)), fh, fw, sh, sw, ph, pw)
        except GeometryError:
            continue


def rel_err(a, ref):
    a, ref = np.asarray(a, dtype=np.float64), np.asarray(ref, dtype=np.float64)
    diff = float(np.max(np.abs(a - ref), initial=0.0))
    if diff == 0.0:
        return 0.0
    return diff / max(float(np.max(np.abs(ref), initial=0.0)), 1e-300)


def _run(name, fn, g, inputs, dtype, nthreads, rng, deterministic=True):
    family = OPERATORS[name][0]
    x, w, dy = inputs
    if name == "partitioned_dilated":
        gz = 1 if rng is None else int(rng.integers(1, g.n * g.oh * g.ow + 1))
        fn = fn or gemm.partitioned_dilated
        return fn(x, dy, g, gz, dtype=dtype, nthreads=nthreads, deterministic=deterministic), gz
    if family == "conv":
        return fn(x, w, g, dtype=dtype, nthreads=nthreads), None
    if family == "deconv":
        return fn(dy, ops.ks_split(np.asarray(w, dtype=dtype), g), g, dtype=dtype, nthreads=nthreads), None
    return fn(x, dy, g, dtype=dtype, nthreads=nthreads), None


def check_geometry(g, rng, overrides=None, nthreads=1):
    """Run every operator on one geometry; returns ``(records, failures)``."""
    overrides = overrides or {}
    x = rng.uniform(-1, 1, g.x_shape)
    w = rng.uniform(-1, 1, g.w_shape)
    dy = rng.uniform(-1, 1, g.y_shape)
    refs = {
        "conv": oracle.naive_conv2d(x, w, g),
        "deconv": oracle.naive_deconv2d(dy, w, g),
        "dilated": oracle.naive_dilated_conv2d(x, dy, g),
    }
    records, failures = {}, []

    def fail(name, why):
        failures.append({"op": name, "reason": why, "geometry": g.to_dict()})

    results = {}
    for name, (family, fn) in OPERATORS.items():
        fn = overrides.get(name, fn)
        ref, ref_stats = refs[family]
        (out, st), _ = _run(name, fn, g, (x, w, dy), np.float64, nthreads, None)
        (out32, _), _ = _run(name, fn, g, (x, w, dy), np.float32, nthreads, None)
        results[name] = (out, st)
        err64, err32 = rel_err(out, ref), rel_err(out32, ref)
        rec = {"err64": err64, "err32": err32, "mac_ratio": ref_stats.macs / st.macs if st.macs else None}
        if not np.array_equal(out, ref):
            fail(name, f"float64 result differs from oracle (rel err {err64:.3g})")
        if err32 > F32_TOL:
            fail(name, f"float32 rel err {err32:.3g} > {F32_TOL}")
        if st.macs + st.zeros_skipped != ref_stats.macs or st.macs > ref_stats.macs:
            fail(name, f"MAC accounting {st} vs oracle {ref_stats.macs}")
        if name == "partitioned_dilated":
            (outz, _), gz = _run(name, fn, g, (x, w, dy), np.float64, nthreads, rng)
            rec["gz"] = gz
            if not np.array_equal(outz, ref):
                fail(name, f"gz={gz} float64 result differs from oracle (rel err {rel_err(outz, ref):.3g})")
            (outf, _), _ = _run(name, fn, g, (x, w, dy), np.float64, nthreads, rng, deterministic=False)
            ef = rel_err(outf, ref)
            rec["err_fast"] = ef
            if ef > PARTITION_TOL:
                fail(name, f"fast-mode rel err {ef:.3g} > {PARTITION_TOL}")
        records[name] = rec

    ks_m, ref_m = results["ks_deconv"][1].macs, refs["deconv"][1].macs
    if g.ih % g.sh == 0 and g.iw % g.sw == 0 and ks_m * g.sh * g.sw != ref_m:
        fail("ks_deconv", f"MACs {ks_m} != oracle {ref_m} / {g.sh * g.sw}")
    sk_m, ref_m = results["sk_dilated"][1].macs, refs["dilated"][1].macs
    if sk_m * g.oh_p * g.ow_p != ref_m * g.oh * g.ow:
        fail("sk_dilated", f"MACs {sk_m} != oracle {ref_m} x {nonzero_calc_fraction(g):.6f}")
    if results["ks_deconv_v2"][1].macs > ks_m:
        fail("ks_deconv_v2", "more MACs than ks_deconv")
    if results["sk_dilated_v2"][1].macs > sk_m:
        fail("sk_dilated_v2", "more MACs than sk_dilated")

    y = refs["conv"][0]
    lhs = float(np.vdot(y, dy))
    for name, rhs in (("ks_deconv", float(np.vdot(x, results["ks_deconv"][0]))),
                      ("sk_dilated", float(np.vdot(w, results["sk_dilated"][0])))):
        gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
        records[name]["adjoint_gap"] = gap
        if gap > ADJOINT_TOL:
            fail(name, f"adjoint identity gap {gap:.3g} > {ADJOINT_TOL}")
    return records, failures


def cmd_verify(seed=0, cases=500, overrides=None, nthreads=1):
    """Sweep ``cases`` random geometries; returns ``(exit_status, summary)``."""
    rng = np.random.default_rng(seed)
    summary = {"seed": seed, "cases": cases, "ops": {}, "failures": []}
    per_op = {}
    for _ in range(cases):
        g = random_geometry(rng)
        records, failures = check_geometry(g, rng, overrides, nthreads)
        summary["failures"].extend(failures)
        for name, rec in records.items():
            per_op.setdefault(name, []).append(rec)
    failed_ops = {f["op"] for f in summary["failures"]}
    for name, recs in per_op.items():
        ratios = [r["mac_ratio"] for r in recs if r["mac_ratio"] is not None]
        summary["ops"][name] = {
            "status": "fail" if name in failed_ops else "pass",
            "max_err64": max(r["err64"] for r in recs),
            "max_err32": max(r["err32"] for r in recs),
            "mean_mac_ratio": sum(ratios) / len(ratios) if ratios else None,
            "max_mac_ratio": max(ratios) if ratios else None,
        }
    return (1 if summary["failures"] else 0), summary
