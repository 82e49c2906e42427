"""Brute-force reference operators.

These materialize the zero-padded and zero-inserted tensors exactly the way a
textbook implementation does and count every multiply-accumulate, zeros
included.  Each output element is summed in a fixed lexicographic order so
float64 runs are reproducible bit for bit.
"""
import numpy as np

from .geometry import flops
from .stats import OpStats
from .tensor import ShapeError, rot180, zero_insert_hw, zero_pad_hw


def check_shape(name, arr, expected):
    if tuple(arr.shape) != tuple(expected):
        raise ShapeError(f"{name} has shape {tuple(arr.shape)}, geometry expects {tuple(expected)}")


def _common_dtype(*arrays):
    return np.result_type(*arrays)


def _dense_conv(xp, w, sh, sw, oh, ow):
    """Strided convolution of an already padded input; returns (y, macs)."""
    n = xp.shape[0]
    oc, fh_n, fw_n, ic_n = w.shape
    y = np.zeros((n, oh, ow, oc), dtype=_common_dtype(xp, w))
    macs = 0
    for fh in range(fh_n):
        for fw in range(fw_n):
            for ic in range(ic_n):
                patch = xp[:, fh:fh + (oh - 1) * sh + 1:sh, fw:fw + (ow - 1) * sw + 1:sw, ic]
                y += patch[..., None] * w[:, fh, fw, ic]
                macs += n * oh * ow * oc
    return y, macs


def naive_conv2d(x, w, g):
    x, w = np.asarray(x), np.asarray(w)
    check_shape("input", x, g.x_shape)
    check_shape("filters", w, g.w_shape)
    xp = zero_pad_hw(x, g.ph, g.pw)
    y, macs = _dense_conv(xp, w, g.sh, g.sw, g.oh, g.ow)
    return y, OpStats(macs)


def naive_deconv2d(dy, w, g):
    """Input gradient as a unit-stride convolution of the zero-inserted gradient.

    The zero-inserted ``dy`` is padded by ``F - 1 - p`` on each side, plus the
    rows/columns the forward floor division dropped on the bottom/right, and
    convolved with the rotated filters (channels swapped).
    """
    dy, w = np.asarray(dy), np.asarray(w)
    check_shape("output gradient", dy, g.y_shape)
    check_shape("filters", w, g.w_shape)
    rh = (g.ih + 2 * g.ph - g.fh) % g.sh
    rw = (g.iw + 2 * g.pw - g.fw) % g.sw
    dyi = zero_insert_hw(dy, g.sh, g.sw)
    dyp = zero_pad_hw(dyi, g.fh - 1 - g.ph, g.fw - 1 - g.pw)
    dyp = np.pad(dyp, ((0, 0), (0, rh), (0, rw), (0, 0)))
    wr = np.ascontiguousarray(np.transpose(rot180(w), (3, 1, 2, 0)))
    dx, macs = _dense_conv(dyp, wr, 1, 1, g.ih, g.iw)
    return dx, OpStats(macs)


def naive_deconv2d_scatter(dy, w, g):
    """Input gradient by scattering every forward term back (direct adjoint)."""
    dy, w = np.asarray(dy), np.asarray(w)
    check_shape("output gradient", dy, g.y_shape)
    check_shape("filters", w, g.w_shape)
    dxp = np.zeros((g.n, g.ih + 2 * g.ph, g.iw + 2 * g.pw, g.ic), dtype=_common_dtype(dy, w))
    for oh in range(g.oh):
        for ow in range(g.ow):
            for oc in range(g.oc):
                for fh in range(g.fh):
                    for fw in range(g.fw):
                        dxp[:, oh * g.sh + fh, ow * g.sw + fw, :] += dy[:, oh, ow, oc, None] * w[oc, fh, fw, :]
    return dxp[:, g.ph:g.ph + g.ih, g.pw:g.pw + g.iw, :].copy()


def naive_dilated_conv2d(x, dy, g):
    """Weight gradient: the padded input convolved with the zero-inserted gradient as filters."""
    x, dy = np.asarray(x), np.asarray(dy)
    check_shape("input", x, g.x_shape)
    check_shape("output gradient", dy, g.y_shape)
    xp = zero_pad_hw(x, g.ph, g.pw)
    dyi = zero_insert_hw(dy, g.sh, g.sw)
    dw = np.zeros(g.w_shape, dtype=_common_dtype(x, dy))
    macs = 0
    for kh in range(g.oh_p):
        for kw in range(g.ow_p):
            for n in range(g.n):
                win = xp[n, kh:kh + g.fh, kw:kw + g.fw, :]
                dw += dyi[n, kh, kw, :, None, None, None] * win[None]
                macs += g.oc * g.fh * g.fw * g.ic
    return dw, OpStats(macs)


def reference_macs(g, op):
    """MAC count of the brute-force operator (batch factor included)."""
    return flops(g, op) // 2
