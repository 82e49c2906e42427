"""im2col lowering and the segmented weight-gradient reduction."""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backend
from .oracle import check_shape, reference_macs
from .ops import _prepare
from .stats import OpStats
from .tensor import zero_pad_hw


def im2col(x, g):
    """Patch matrix of shape ``(N*O_H*O_W, F_H*F_W*I_C)``; padded taps are explicit zeros.

    Row ``(n*O_H + oh)*O_W + ow``, column ``(fh*F_W + fw)*I_C + ic``.
    """
    x = np.asarray(x)
    check_shape("input", x, g.x_shape)
    xp = zero_pad_hw(x, g.ph, g.pw)
    cols = np.empty((g.n, g.oh, g.ow, g.fh, g.fw, g.ic), dtype=x.dtype)
    for fh in range(g.fh):
        for fw in range(g.fw):
            cols[:, :, :, fh, fw, :] = xp[:, fh:fh + (g.oh - 1) * g.sh + 1:g.sh,
                                          fw:fw + (g.ow - 1) * g.sw + 1:g.sw, :]
    return cols.reshape(g.n * g.oh * g.ow, g.fh * g.fw * g.ic)


def reshape_filters(w, g):
    """Filters as a ``(F_H*F_W*I_C, O_C)`` matrix matching :func:`im2col` columns."""
    w = np.asarray(w)
    check_shape("filters", w, g.w_shape)
    return np.ascontiguousarray(w.reshape(g.oc, -1).T)


def gemm_conv2d(x, w, g, *, dtype=None, block=64, nthreads=1, backend_name=None):
    dt, (x, w) = _prepare(x, w, dtype=dtype)
    a = im2col(x, g)
    b = reshape_filters(w, g)
    out = np.empty((a.shape[0], b.shape[1]), dtype=dt)
    backend.get(backend_name).gemm(a, b, out, block, nthreads)
    macs = a.shape[0] * a.shape[1] * b.shape[1]
    return out.reshape(g.y_shape), OpStats.against(macs, reference_macs(g, "conv"))


def segment_bounds(gk, gz):
    """``gz`` contiguous, near-equal ranges covering ``[0, gk)``."""
    base, extra = divmod(gk, gz)
    bounds, start = [], 0
    for i in range(gz):
        stop = start + base + (1 if i < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def _tree_sum(parts):
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def partitioned_dilated(x, dy, g, gz, *, dtype=None, nthreads=1, deterministic=True,
                        backend_name=None):
    """Weight gradient with the ``N*O_H*O_W`` reduction axis cut into ``gz`` segments.

    In deterministic mode the segments are chained through one accumulator in
    index order, which reproduces the unsegmented sum bit for bit.  Otherwise
    each segment builds its own partial gradient on up to ``nthreads`` threads
    and the partials are added pairwise.
    """
    gk = g.n * g.oh * g.ow
    if not 1 <= gz <= gk:
        raise ValueError(f"gz must lie in [1, {gk}], got {gz}")
    dt, (x, dy) = _prepare(x, dy, dtype=dtype)
    check_shape("input", x, g.x_shape)
    check_shape("output gradient", dy, g.y_shape)
    kern = backend.get(backend_name)
    bounds = segment_bounds(gk, gz)

    def run(bound, part=None):
        if part is None:
            part = np.zeros(g.w_shape, dtype=dt)
        macs = kern.sk_dilated_segment(x, dy, part, g.sh, g.sw, g.ph, g.pw, *bound)
        return part, macs

    if deterministic or gz == 1:
        dw, macs = np.zeros(g.w_shape, dtype=dt), 0
        for b in bounds:
            macs += run(b, dw)[1]
    else:
        if nthreads > 1:
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                results = list(pool.map(run, bounds))
        else:
            results = [run(b) for b in bounds]
        dw = _tree_sum([p for p, _ in results])
        macs = sum(m for _, m in results)
    return dw, OpStats.against(macs, reference_macs(g, "dilated"))
