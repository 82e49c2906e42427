"""Zero-skipping convolution operators.

* :func:`conv_v2` trims the filter to the unpadded part of every patch.
* :func:`ks_split` + :func:`ks_deconv` split the rotated filter into
  ``sh * sw`` dense sub-kernels, one per residue class of the input-gradient
  coordinates, so the zeros inserted into the output gradient are never read.
  :func:`ks_deconv_v2` additionally trims each sub-kernel at the border.
* :func:`sk_dilated` reads the input with a leaping step equal to the stride
  instead of building a zero-inserted filter; :func:`sk_dilated_v2` hoists the
  range check into precomputed loop bounds.

All operators return ``(result, OpStats)`` where the stats compare against the
brute-force operator of :mod:`cks.oracle`.  Per-element accumulation order
matches the oracles, so float64 results are bitwise equal to them.
"""
from dataclasses import dataclass

import numpy as np

from . import backend
from .oracle import check_shape, reference_macs
from .stats import OpStats
from .tensor import ShapeError, Tensor6, as_dtype


def _prepare(*arrays, dtype=None):
    dt = as_dtype(dtype) if dtype is not None else np.result_type(*arrays)
    if dt not in (np.float32, np.float64):
        dt = np.dtype(np.float64)
    return dt, [np.ascontiguousarray(a, dtype=dt) for a in arrays]


def _ceil_div(a, b):
    return -((-a) // b)


@dataclass
class KernelSplit:
    """Rotated filters split into ``sh * sw`` sub-kernels.

    ``c`` has shape ``(sh, sw, O_C, ceil(F_H/sh), ceil(F_W/sw), I_C)``.
    Sub-kernel ``(y, x)`` occupies the leading ``ch[y, x] x cw[y, x]`` spatial
    slots; the remaining slots are zero.
    """

    c: np.ndarray
    ch: np.ndarray
    cw: np.ndarray
    sh: int
    sw: int
    fh: int
    fw: int

    @property
    def oph(self):
        return self.ch - 1

    @property
    def opw(self):
        return self.cw - 1

    def extents(self):
        return {(y, x): (int(self.ch[y, x]), int(self.cw[y, x]))
                for y in range(self.sh) for x in range(self.sw)}

    def as_tensor6(self):
        return Tensor6(self.c.shape, self.c, dtype=self.c.dtype)

    def matches(self, g):
        return (self.sh, self.sw, self.fh, self.fw) == (g.sh, g.sw, g.fh, g.fw) and \
            self.c.shape[2] == g.oc and self.c.shape[5] == g.ic


def split_extents(f, s):
    """Per-residue sub-kernel extents ``ceil((f - r) / s)`` for ``r < s``."""
    return [max(_ceil_div(f - r, s), 0) for r in range(s)]


def ks_split(w, g):
    w = np.asarray(w)
    check_shape("filters", w, g.w_shape)
    if w.dtype not in (np.float32, np.float64):
        w = w.astype(np.float64)
    ch_1d, cw_1d = split_extents(g.fh, g.sh), split_extents(g.fw, g.sw)
    c = np.zeros((g.sh, g.sw, g.oc, _ceil_div(g.fh, g.sh), _ceil_div(g.fw, g.sw), g.ic), dtype=w.dtype)
    ch = np.empty((g.sh, g.sw), dtype=np.intp)
    cw = np.empty((g.sh, g.sw), dtype=np.intp)
    for y in range(g.sh):
        for x in range(g.sw):
            ch[y, x], cw[y, x] = ch_1d[y], cw_1d[x]
            # slot (k, l) holds tap (y + (oph - k) * sh, x + (opw - l) * sw):
            # the residue-class subsample, reversed, i.e. rotated by 180 degrees
            c[y, x, :, :ch_1d[y], :cw_1d[x], :] = w[:, y::g.sh, x::g.sw, :][:, ::-1, ::-1, :]
    return KernelSplit(c, ch, cw, g.sh, g.sw, g.fh, g.fw)


def conv_v2(x, w, g, *, dtype=None, nthreads=1, backend_name=None):
    dt, (x, w) = _prepare(x, w, dtype=dtype)
    check_shape("input", x, g.x_shape)
    check_shape("filters", w, g.w_shape)
    y = np.zeros(g.y_shape, dtype=dt)
    macs = backend.get(backend_name).conv_v2(x, w, y, g.sh, g.sw, g.ph, g.pw, nthreads)
    return y, OpStats.against(macs, reference_macs(g, "conv"))


def _ks(dy, ks, g, trim, dtype, nthreads, backend_name):
    if not isinstance(ks, KernelSplit):
        ks = ks_split(ks, g)
    if not ks.matches(g):
        raise ShapeError(f"kernel split {ks.c.shape} does not belong to geometry {g.describe()}")
    dt, (dy, c) = _prepare(dy, ks.c, dtype=dtype)
    check_shape("output gradient", dy, g.y_shape)
    dx = np.zeros(g.x_shape, dtype=dt)
    macs = backend.get(backend_name).ks_deconv(
        dy, c, ks.ch, ks.cw, dx, g.sh, g.sw, g.ph, g.pw, trim, nthreads)
    return dx, OpStats.against(macs, reference_macs(g, "deconv"))


def ks_deconv(dy, ks, g, *, dtype=None, nthreads=1, backend_name=None):
    """Input gradient from a :class:`KernelSplit` (raw filters are split on the fly).

    Each sub-kernel runs a unit-stride convolution over ``dy`` whose result
    lands directly on its residue class of the input gradient.
    """
    return _ks(dy, ks, g, False, dtype, nthreads, backend_name)


def ks_deconv_v2(dy, ks, g, *, dtype=None, nthreads=1, backend_name=None):
    # trim bound uses the sub-kernel extent ch (= oph + 1); oph alone drops the last tap
    return _ks(dy, ks, g, True, dtype, nthreads, backend_name)


def _sk(x, dy, g, trim, dtype, nthreads, backend_name):
    dt, (x, dy) = _prepare(x, dy, dtype=dtype)
    check_shape("input", x, g.x_shape)
    check_shape("output gradient", dy, g.y_shape)
    dw = np.zeros(g.w_shape, dtype=dt)
    macs = backend.get(backend_name).sk_dilated(x, dy, dw, g.sh, g.sw, g.ph, g.pw, trim, nthreads)
    return dw, OpStats.against(macs, reference_macs(g, "dilated"))


def sk_dilated(x, dy, g, *, dtype=None, nthreads=1, backend_name=None):
    return _sk(x, dy, g, False, dtype, nthreads, backend_name)


def sk_dilated_v2(x, dy, g, *, dtype=None, nthreads=1, backend_name=None):
    """Weight gradient with per-tap loop bounds ``[ceil(-ih_s/sh), ceil((I_H-ih_s)/sh))``, clamped to ``[0, O_H)``."""
    return _sk(x, dy, g, True, dtype, nthreads, backend_name)
