"""Zero-skipping convolution, deconvolution and dilated-convolution operators on CPU."""
from . import backend
from .dispatch import DispatchPolicy, dispatch_conv, dispatch_deconv, dispatch_dilated
from .gemm import gemm_conv2d, im2col, partitioned_dilated
from .geometry import (ConvGeometry, GeometryError, GzPolicy, flops, nonzero_calc_fraction,
                       pad_zero_fraction, select_gz)
from .layer import Conv2dLayer, grad_check, smoke_train
from .oracle import naive_conv2d, naive_deconv2d, naive_deconv2d_scatter, naive_dilated_conv2d
from .ops import KernelSplit, conv_v2, ks_deconv, ks_deconv_v2, ks_split, sk_dilated, sk_dilated_v2
from .stats import OpStats
from .tensor import (ShapeError, Tensor4, Tensor6, rot180, transpose_filters, untranspose_filters,
                     zero_insert_hw, zero_pad_hw)

__all__ = [
    "backend", "Conv2dLayer", "ConvGeometry", "DispatchPolicy", "GeometryError", "GzPolicy",
    "KernelSplit", "OpStats", "ShapeError", "Tensor4", "Tensor6", "conv_v2", "dispatch_conv",
    "dispatch_deconv", "dispatch_dilated", "flops", "gemm_conv2d", "grad_check", "im2col",
    "ks_deconv", "ks_deconv_v2", "ks_split", "naive_conv2d", "naive_deconv2d",
    "naive_deconv2d_scatter", "naive_dilated_conv2d", "nonzero_calc_fraction",
    "pad_zero_fraction", "partitioned_dilated", "rot180", "select_gz", "sk_dilated",
    "sk_dilated_v2", "smoke_train", "transpose_filters", "untranspose_filters",
    "zero_insert_hw", "zero_pad_hw",
]
