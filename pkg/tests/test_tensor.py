import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from cks.tensor import (ShapeError, Tensor4, Tensor6, rot180, transpose_filters,
                        untranspose_filters, zero_insert_hw, zero_pad_hw)

dims4 = st.tuples(*[st.integers(1, 4)] * 4)


def dense4(shape):
    return arrays(np.float64, shape, elements=st.floats(-10, 10, allow_nan=False))


def test_zero_tensor_reads_zero():
    t = Tensor4((2, 3, 4, 5))
    assert t.at((1, 2, 3, 4)) == 0.0


def test_singleton():
    assert Tensor4((1, 1, 1, 1), [7.0]).at((0, 0, 0, 0)) == 7.0


def test_row_major_offset():
    t = Tensor4((1, 2, 2, 1), [1, 2, 3, 4])
    assert t.at((0, 1, 0, 0)) == 3.0
    assert t.offset((0, 1, 0, 0)) == 2


def test_setter_and_dtype():
    t = Tensor4((1, 1, 2, 2), dtype="f32")
    t.set((0, 0, 1, 0), 2.5)
    assert t.at((0, 0, 1, 0)) == 2.5
    assert t.dtype == np.float32


@pytest.mark.parametrize("idx", [(0, 0, 0, 2), (0, -1, 0, 0), (1, 0, 0, 0), (0, 0, 0)])
def test_out_of_range_is_an_error(idx):
    t = Tensor4((1, 1, 1, 2), [1.0, 2.0])
    with pytest.raises(IndexError):
        t.at(idx)
    with pytest.raises(IndexError):
        t.set(idx, 1.0)


def test_length_mismatch():
    with pytest.raises(ShapeError):
        Tensor4((1, 2, 2, 1), [1, 2, 3])
    with pytest.raises(ShapeError):
        Tensor6((1, 1, 1), [])


@given(dims4)
def test_flat_indexing_is_a_bijection(dims):
    t = Tensor4(dims)
    offsets = sorted(t.offset(idx) for idx in np.ndindex(*dims))
    assert offsets == list(range(len(t)))


def test_tensor6_offset():
    t = Tensor6((2, 1, 3, 1, 2, 2), np.arange(24))
    assert t.at((1, 0, 2, 0, 1, 1)) == 23.0
    assert t.offset((1, 0, 0, 0, 0, 0)) == 12


@pytest.mark.parametrize("dtype", ["f32", "f64"])
def test_binary_round_trip(dtype):
    t = Tensor4((2, 3, 1, 2), np.arange(12) * 0.5, dtype=dtype)
    blob = t.to_bytes()
    assert blob[:4] == b"CKS1"
    assert int.from_bytes(blob[4:12], "little") == 4
    assert [int.from_bytes(blob[12 + 8 * i:20 + 8 * i], "little") for i in range(4)] == [2, 3, 1, 2]
    back = Tensor4.from_bytes(blob)
    assert back == t and back.dtype == t.dtype


def test_binary_rejects_garbage():
    with pytest.raises(ValueError):
        Tensor4.from_bytes(b"XXXX" + bytes(40))
    blob = Tensor4((1, 1, 1, 2), [1.0, 2.0]).to_bytes()
    with pytest.raises(ValueError):
        Tensor4.from_bytes(blob[:-3])
    with pytest.raises(ShapeError):
        Tensor6.from_bytes(blob)


def test_json_round_trip():
    t = Tensor4((1, 2, 2, 1), [1, 2, 3, 4])
    assert Tensor4.from_json(t.to_json()) == t


def test_rot180_small_cases():
    w = np.array([5.0]).reshape(1, 1, 1, 1)
    np.testing.assert_array_equal(rot180(w), w)
    a, b = 1.5, -2.0
    np.testing.assert_array_equal(rot180(np.array([a, b]).reshape(1, 2, 1, 1)).ravel(), [b, a])


def test_rot180_definition(rng):
    w = rng.standard_normal((2, 3, 4, 2))
    r = rot180(w)
    for oc, fh, fw, ic in np.ndindex(*w.shape):
        assert r[oc, fh, fw, ic] == w[oc, 2 - fh, 3 - fw, ic]


@given(st.tuples(*[st.integers(1, 4)] * 4).flatmap(dense4))
@settings(max_examples=50)
def test_rot180_involution(w):
    np.testing.assert_array_equal(rot180(rot180(w)), w)


def test_transpose_filters():
    w = np.array([3.0]).reshape(1, 1, 1, 1)
    np.testing.assert_array_equal(transpose_filters(w), w)
    assert transpose_filters(np.zeros((2, 3, 3, 4))).shape == (3, 3, 4, 2)


@given(st.tuples(*[st.integers(1, 4)] * 4).flatmap(dense4))
@settings(max_examples=50)
def test_transpose_round_trip(w):
    wt = transpose_filters(w)
    np.testing.assert_array_equal(untranspose_filters(wt), w)
    oc, fh, fw, ic = (d - 1 for d in w.shape)
    assert wt[fh, fw, ic, oc] == w[oc, fh, fw, ic]


def test_zero_pad():
    x = np.ones((1, 2, 2, 1))
    np.testing.assert_array_equal(zero_pad_hw(x, 0, 0), x)
    p = zero_pad_hw(np.full((1, 1, 1, 1), 5.0), 1, 1)
    expected = np.zeros((1, 3, 3, 1))
    expected[0, 1, 1, 0] = 5.0
    np.testing.assert_array_equal(p, expected)


@given(st.tuples(*[st.integers(1, 4)] * 4).flatmap(dense4), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=50)
def test_zero_pad_preserves_sum_and_nonzeros(x, ph, pw):
    p = zero_pad_hw(x, ph, pw)
    assert p.shape == (x.shape[0], x.shape[1] + 2 * ph, x.shape[2] + 2 * pw, x.shape[3])
    assert np.sum(p) == pytest.approx(np.sum(x))
    assert sorted(p[p != 0]) == sorted(x[x != 0])


def test_zero_insert():
    y = np.ones((1, 3, 2, 1))
    np.testing.assert_array_equal(zero_insert_hw(y, 1, 1), y)
    a, b = 4.0, 7.0
    out = zero_insert_hw(np.array([a, b]).reshape(1, 2, 1, 1), 3, 1)
    np.testing.assert_array_equal(out.ravel(), [a, 0, 0, b])


@given(st.tuples(*[st.integers(1, 4)] * 4).flatmap(dense4), st.integers(1, 4), st.integers(1, 4))
@settings(max_examples=50)
def test_zero_insert_structure(y, sh, sw):
    out = zero_insert_hw(y, sh, sw)
    n, h, w, c = y.shape
    assert out.shape == (n, h + (h - 1) * (sh - 1), w + (w - 1) * (sw - 1), c)
    np.testing.assert_array_equal(out[:, ::sh, ::sw, :], y)
    assert np.count_nonzero(out) == np.count_nonzero(y)
