import json
import math

import pytest
from hypothesis import given, strategies as st

from cks.geometry import (ConvGeometry, GeometryError, GzPolicy, flops, nonzero_calc_fraction,
                          pad_zero_fraction, select_gz)

from conftest import FIG4


def h_only(ih, fh, sh=1, ph=0):
    return ConvGeometry.infer(n=1, ih=ih, iw=1, ic=1, oc=1, fh=fh, fw=1, sh=sh, sw=1, ph=ph, pw=0)


@pytest.mark.parametrize("ih, ph, fh, sh, oh", [(5, 1, 3, 3, 2), (4, 0, 2, 2, 2), (7, 2, 5, 1, 7)])
def test_infer_output_height(ih, ph, fh, sh, oh):
    assert h_only(ih, fh, sh, ph).oh == oh


def test_filter_larger_than_padded_input():
    with pytest.raises(GeometryError):
        h_only(1, 3)


@pytest.mark.parametrize("kw", [dict(ph=3), dict(sh=0), dict(ih=0), dict(ph=-1)])
def test_invalid_parameters(kw):
    params = dict(ih=6, fh=3, sh=1, ph=0)
    params.update(kw)
    with pytest.raises(GeometryError):
        h_only(**params)


def test_inconsistent_explicit_output():
    with pytest.raises(GeometryError):
        ConvGeometry(1, 4, 4, 1, 1, 2, 2, 2, 2, 0, 0, oh=3, ow=2)


def test_json_uses_layer_field_names():
    g = ConvGeometry.square(2, 8, 3, 4, 3, s=2, p=1)
    d = json.loads(g.to_json())
    assert sorted(d) == sorted(["n", "ih", "iw", "ic", "oc", "fh", "fw", "sh", "sw", "ph", "pw"])
    assert ConvGeometry.from_json(g.to_json()) == g
    with pytest.raises(GeometryError):
        ConvGeometry.from_dict({**d, "bogus": 1})


def test_pad_fraction_values():
    assert pad_zero_fraction(ConvGeometry.square(1, 32, 1, 1, 3)) == 0.0
    assert pad_zero_fraction(ConvGeometry.square(1, 32, 1, 1, 3, p=1)) == pytest.approx(
        1 - 1024 / 1156, abs=1e-12)
    assert 1 - 1024 / 1156 == pytest.approx(0.11419, abs=1e-5)


def test_pad_fraction_grows_as_maps_shrink():
    fr = [pad_zero_fraction(ConvGeometry.square(1, i, 1, 1, 3, p=1)) for i in range(64, 3, -1)]
    assert all(b > a for a, b in zip(fr, fr[1:]))


def test_nonzero_fraction_values():
    assert nonzero_calc_fraction(ConvGeometry.square(1, 9, 1, 1, 3, s=1)) == 1.0
    g = ConvGeometry.square(1, 16, 1, 1, 2, s=2)
    assert (g.oh, g.oh_p) == (8, 15)
    assert nonzero_calc_fraction(g) == pytest.approx(64 / 225, abs=1e-15)


def test_nonzero_fraction_decreases_with_stride():
    # fixed 8x8 output: I = 8*s with a stride-sized filter
    fr = [nonzero_calc_fraction(ConvGeometry.square(1, 8 * s, 1, 1, s, s=s)) for s in range(1, 7)]
    assert fr[0] == 1.0
    assert all(b < a for a, b in zip(fr, fr[1:]))
    big = ConvGeometry.square(1, 4000, 1, 1, 2, s=2)
    assert nonzero_calc_fraction(big) == pytest.approx(1 / 4, rel=2e-3)


@given(st.integers(1, 3), st.integers(4, 12), st.integers(1, 4), st.integers(1, 4),
       st.sampled_from([1, 2, 3, 5]), st.integers(1, 3), st.integers(0, 2))
def test_zero_fraction_iff(n, i, ic, oc, f, s, p):
    if p >= f or f > i + 2 * p:
        return
    g = ConvGeometry.square(n, i, ic, oc, f, s=s, p=p)
    assert (pad_zero_fraction(g) == 0) == (p == 0)
    assert (nonzero_calc_fraction(g) == 1) == (s == 1 or g.oh == 1)


def test_flops_fig4_baseline():
    assert flops(FIG4, "conv") == 72


def test_flops_all_ones():
    g = ConvGeometry.square(1, 1, 1, 1, 1)
    assert flops(g, "conv") == 2
    assert flops(g, "deconv") == 2
    assert flops(g, "dilated") == 2


@pytest.mark.parametrize("i, f, s, p", [(8, 3, 1, 1), (9, 3, 2, 1), (12, 5, 3, 2)])
def test_flops_deconv_over_conv_ratio(i, f, s, p):
    g = ConvGeometry.square(2, i, 3, 3, f, s=s, p=p)
    assert flops(g, "deconv") / flops(g, "conv") == pytest.approx((g.ih * g.iw) / (g.oh * g.ow), rel=1e-15)


def test_flops_dilated_batch_readings():
    g = ConvGeometry.square(4, 8, 2, 3, 3, s=2, p=1)
    assert flops(g, "dilated") == 4 * flops(g, "dilated", include_batch=False)
    with pytest.raises(ValueError):
        flops(g, "pool")


def test_select_gz():
    assert select_gz(1, 1, 1, GzPolicy(1, 64)) == 2
    assert select_gz(1, 1, 100, GzPolicy(3, 64)) == 3
    assert select_gz(1000, 1000, 1, GzPolicy(1, 8)) == 8
    assert 1 <= select_gz(5, 7, 2) <= GzPolicy().upper_bound


@given(st.integers(1, 1000), st.integers(1, 1000), st.integers(1, 50), st.integers(1, 20))
def test_select_gz_monotone(a, b, c, extra):
    pol = GzPolicy(2, 40)
    lo, hi = select_gz(a, b, c, pol), select_gz(a + extra, b, c, pol)
    assert pol.lower_bound <= lo <= hi <= pol.upper_bound


def test_policy_bounds():
    with pytest.raises(ValueError):
        GzPolicy(5, 2)
    assert math.isfinite(GzPolicy().upper_bound)
