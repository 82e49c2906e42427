"""Route each operator to the cheapest equivalent implementation.

Trimming pays off once the padded border is a noticeable share of the input
(default threshold 6%).  Unit-stride deconvolution has no inserted zeros, so
it runs as an ordinary trimmed convolution with rotated, channel-swapped
filters instead of through the kernel split.
"""
from dataclasses import dataclass

import numpy as np

from . import gemm, ops
from .geometry import ConvGeometry, pad_zero_fraction
from .oracle import reference_macs
from .stats import OpStats


@dataclass(frozen=True)
class DispatchPolicy:
    trim_threshold: float = 0.06


DEFAULT_POLICY = DispatchPolicy()


def _trims(g, policy):
    return pad_zero_fraction(g) > policy.trim_threshold


def conv_route(g, policy=DEFAULT_POLICY):
    return "conv_v2" if _trims(g, policy) else "gemm"


def deconv_route(g, policy=DEFAULT_POLICY):
    if g.sh == 1 and g.sw == 1:
        return "common"
    return "ks_deconv_v2" if _trims(g, policy) else "ks_deconv"


def dilated_route(g, policy=DEFAULT_POLICY):
    return "sk_dilated_v2" if _trims(g, policy) else "sk_dilated"


def dispatch_conv(x, w, g, policy=DEFAULT_POLICY, **kw):
    if conv_route(g, policy) == "conv_v2":
        return ops.conv_v2(x, w, g, **kw)
    return gemm.gemm_conv2d(x, w, g, **kw)


def _unit_stride_deconv(dy, w, g, **kw):
    gt = ConvGeometry(g.n, g.oh, g.ow, g.oc, g.ic, g.fh, g.fw, 1, 1,
                      g.fh - 1 - g.ph, g.fw - 1 - g.pw)
    wt = np.transpose(np.asarray(w)[:, ::-1, ::-1, :], (3, 1, 2, 0))
    dx, st = ops.conv_v2(dy, wt, gt, **kw)
    return dx, OpStats.against(st.macs, reference_macs(g, "deconv"))


def dispatch_deconv(dy, w, g, policy=DEFAULT_POLICY, kernel_split=None, **kw):
    """``w`` is the raw filter tensor; pass a cached ``kernel_split`` to skip the split."""
    route = deconv_route(g, policy)
    if route == "common":
        return _unit_stride_deconv(dy, w, g, **kw)
    ks = kernel_split if kernel_split is not None else ops.ks_split(w, g)
    fn = ops.ks_deconv_v2 if route == "ks_deconv_v2" else ops.ks_deconv
    return fn(dy, ks, g, **kw)


def dispatch_dilated(x, dy, g, policy=DEFAULT_POLICY, **kw):
    fn = ops.sk_dilated_v2 if dilated_route(g, policy) == "sk_dilated_v2" else ops.sk_dilated
    return fn(x, dy, g, **kw)
