import numpy as np
import pytest

from cks.geometry import ConvGeometry, flops
from cks.oracle import (naive_conv2d, naive_deconv2d, naive_deconv2d_scatter,
                        naive_dilated_conv2d, reference_macs)
from cks.tensor import ShapeError
from cks.verify import random_geometry

from conftest import FIG4


def definition_conv(x, w, g):
    """Straight from the index formula, skipping taps that land in the padding."""
    y = np.zeros(g.y_shape)
    for n, oh, ow, oc in np.ndindex(*g.y_shape):
        s = 0.0
        for fh, fw, ic in np.ndindex(g.fh, g.fw, g.ic):
            ih, iw = oh * g.sh + fh - g.ph, ow * g.sw + fw - g.pw
            if 0 <= ih < g.ih and 0 <= iw < g.iw:
                s += x[n, ih, iw, ic] * w[oc, fh, fw, ic]
        y[n, oh, ow, oc] = s
    return y


def test_hand_case(hand):
    g = hand["g"]
    y, st = naive_conv2d(hand["x"], hand["w"], g)
    assert y.ravel().tolist() == hand["y"]
    assert st.macs == 4
    dx, _ = naive_deconv2d(hand["dy"], hand["w"], g)
    assert dx.ravel().tolist() == hand["dx"]
    assert naive_deconv2d_scatter(hand["dy"], hand["w"], g).ravel().tolist() == hand["dx"]
    dw, _ = naive_dilated_conv2d(hand["x"], hand["dy"], g)
    assert dw.ravel().tolist() == hand["dw"]


def test_hand_case_inner_products(hand):
    g = hand["g"]
    y, _ = naive_conv2d(hand["x"], hand["w"], g)
    dx, _ = naive_deconv2d(hand["dy"], hand["w"], g)
    dw, _ = naive_dilated_conv2d(hand["x"], hand["dy"], g)
    assert np.vdot(y, hand["dy"]) == np.vdot(hand["x"], dx) == np.vdot(hand["w"], dw) == 188.0


def test_zero_inputs_give_zero():
    g = ConvGeometry.square(2, 6, 3, 2, 3, s=2, p=1)
    w = np.ones(g.w_shape)
    assert not naive_conv2d(np.zeros(g.x_shape), w, g)[0].any()
    assert not naive_dilated_conv2d(np.ones(g.x_shape), np.zeros(g.y_shape), g)[0].any()


def test_unit_stride_scalar_identity():
    g = ConvGeometry.square(2, 5, 1, 1, 1)
    dy = np.arange(50.0).reshape(g.y_shape)
    dx, _ = naive_deconv2d(dy, np.ones(g.w_shape), g)
    np.testing.assert_array_equal(dx, dy)


def test_fig4_counts():
    _, st = naive_conv2d(np.ones(FIG4.x_shape), np.ones(FIG4.w_shape), FIG4)
    assert st.macs == 36 and st.flops == 72


def test_matches_index_definition(rng):
    for _ in range(25):
        g = random_geometry(rng)
        x, w = rng.standard_normal(g.x_shape), rng.standard_normal(g.w_shape)
        np.testing.assert_allclose(naive_conv2d(x, w, g)[0], definition_conv(x, w, g), rtol=1e-12, atol=1e-12)


def test_deconv_forms_agree_bitwise(rng):
    for _ in range(60):
        g = random_geometry(rng)
        dy, w = rng.standard_normal(g.y_shape), rng.standard_normal(g.w_shape)
        np.testing.assert_array_equal(naive_deconv2d(dy, w, g)[0], naive_deconv2d_scatter(dy, w, g))


def test_adjoint_identities(rng):
    for _ in range(40):
        g = random_geometry(rng)
        x, w, gy = (rng.standard_normal(s) for s in (g.x_shape, g.w_shape, g.y_shape))
        lhs = np.vdot(naive_conv2d(x, w, g)[0], gy)
        assert np.vdot(x, naive_deconv2d(gy, w, g)[0]) == pytest.approx(lhs, rel=1e-12, abs=1e-12)
        assert np.vdot(w, naive_dilated_conv2d(x, gy, g)[0]) == pytest.approx(lhs, rel=1e-12, abs=1e-12)


def test_mac_counts_equal_half_the_flop_formulas(rng):
    for _ in range(40):
        g = random_geometry(rng)
        x, w, gy = (rng.standard_normal(s) for s in (g.x_shape, g.w_shape, g.y_shape))
        assert 2 * naive_conv2d(x, w, g)[1].macs == flops(g, "conv")
        assert 2 * naive_deconv2d(gy, w, g)[1].macs == flops(g, "deconv")
        assert 2 * naive_dilated_conv2d(x, gy, g)[1].macs == flops(g, "dilated")
        assert reference_macs(g, "dilated") * 2 == flops(g, "dilated")


def test_shape_errors():
    g = ConvGeometry.square(1, 5, 2, 3, 3)
    with pytest.raises(ShapeError):
        naive_conv2d(np.zeros((1, 5, 5, 3)), np.zeros(g.w_shape), g)
    with pytest.raises(ShapeError):
        naive_deconv2d(np.zeros((1, 2, 2, 3)), np.zeros(g.w_shape), g)
    with pytest.raises(ShapeError):
        naive_dilated_conv2d(np.zeros(g.x_shape), np.zeros((1, 3, 3, 2)), g)
