"""Dense NHWC tensors and the layout transforms the operators need.

Operators work on plain ``numpy.ndarray`` values; :class:`Tensor4` and
:class:`Tensor6` add checked element access and the on-disk formats used for
fixtures.  Layouts follow the conv-layer convention: feature maps are
``(N, H, W, C)`` and filters are ``(O_C, F_H, F_W, I_C)``.
"""
import json
import struct

import numpy as np

MAGIC = b"CKS1"
DTYPES = {"f32": np.float32, "f64": np.float64}
_CODES = {np.dtype(np.float32): 4, np.dtype(np.float64): 8}


class ShapeError(ValueError):
    """Tensor extents disagree with each other or with a geometry."""


def as_dtype(dtype):
    if isinstance(dtype, str) and dtype in DTYPES:
        return np.dtype(DTYPES[dtype])
    dt = np.dtype(dtype)
    if dt not in _CODES:
        raise TypeError(f"unsupported scalar type {dt}; use float32 or float64")
    return dt


class _Tensor:
    rank = None

    def __init__(self, dims, data=None, dtype=np.float64):
        dims = tuple(int(d) for d in dims)
        if len(dims) != self.rank:
            raise ShapeError(f"{type(self).__name__} needs {self.rank} extents, got {len(dims)}")
        if any(d < 0 for d in dims):
            raise ShapeError(f"negative extent in {dims}")
        dt = as_dtype(dtype)
        if data is None:
            arr = np.zeros(dims, dtype=dt)
        else:
            flat = np.asarray(data, dtype=dt).reshape(-1)
            if flat.size != int(np.prod(dims)):
                raise ShapeError(f"data length {flat.size} != product of {dims}")
            arr = flat.reshape(dims)
        self.data = np.ascontiguousarray(arr)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        return cls(arr.shape, arr, dtype=arr.dtype if arr.dtype in _CODES else np.float64)

    @property
    def dims(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __len__(self):
        return self.data.size

    def __eq__(self, other):
        if not isinstance(other, _Tensor):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"{type(self).__name__}(dims={self.dims}, dtype={self.dtype})"

    def offset(self, idx):
        """Row-major flat offset of ``idx`` (last axis fastest)."""
        self._check(idx)
        off = 0
        for i, d in zip(idx, self.dims):
            off = off * d + i
        return off

    def _check(self, idx):
        if len(idx) != self.rank:
            raise IndexError(f"expected {self.rank} coordinates, got {len(idx)}")
        for axis, (i, d) in enumerate(zip(idx, self.dims)):
            if not 0 <= i < d:
                raise IndexError(f"coordinate {i} out of range [0, {d}) on axis {axis}")

    def at(self, idx):
        self._check(idx)
        return self.data.item(tuple(idx))

    def set(self, idx, value):
        self._check(idx)
        self.data[tuple(idx)] = value

    def to_bytes(self):
        """``CKS1`` magic, rank (u64), extents (u64 each), then little-endian scalars.

        The scalar width is implied by the payload length.
        """
        head = MAGIC + struct.pack(f"<{1 + self.rank}Q", self.rank, *self.dims)
        return head + self.data.astype(self.dtype.newbyteorder("<"), copy=False).tobytes()

    @classmethod
    def from_bytes(cls, blob):
        if blob[:4] != MAGIC:
            raise ValueError("not a CKS1 tensor blob")
        (rank,) = struct.unpack_from("<Q", blob, 4)
        if rank != cls.rank:
            raise ShapeError(f"blob has rank {rank}, expected {cls.rank}")
        dims = struct.unpack_from(f"<{rank}Q", blob, 12)
        start = 12 + 8 * rank
        count = int(np.prod(dims))
        payload = len(blob) - start
        if count == 0 and payload == 0:
            return cls(dims)
        if payload == 4 * count:
            dt = np.dtype("<f4")
        elif payload == 8 * count:
            dt = np.dtype("<f8")
        else:
            raise ValueError(f"payload of {payload} bytes does not hold {count} scalars")
        data = np.frombuffer(blob, dtype=dt, count=count, offset=start)
        return cls(dims, data, dtype=dt.newbyteorder("="))

    def to_json(self):
        return json.dumps({"dims": list(self.dims), "dtype": "f32" if self.dtype == np.float32 else "f64",
                           "data": self.data.reshape(-1).tolist()})

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text) if isinstance(text, (str, bytes)) else text
        return cls(obj["dims"], obj["data"], dtype=obj.get("dtype", "f64"))


class Tensor4(_Tensor):
    rank = 4


class Tensor6(_Tensor):
    rank = 6


def _as4(t, name="tensor"):
    arr = np.asarray(t)
    if arr.ndim != 4:
        raise ShapeError(f"{name} must be 4-D, got shape {arr.shape}")
    return arr


def rot180(w):
    """Flip filters on both spatial axes: ``out[oc, fh, fw, ic] = w[oc, F_H-1-fh, F_W-1-fw, ic]``."""
    return np.ascontiguousarray(_as4(w, "filters")[:, ::-1, ::-1, :])


def transpose_filters(w):
    """``(O_C, F_H, F_W, I_C)`` -> ``(F_H, F_W, I_C, O_C)``."""
    return np.ascontiguousarray(np.transpose(_as4(w, "filters"), (1, 2, 3, 0)))


def untranspose_filters(wt):
    """Inverse of :func:`transpose_filters`."""
    return np.ascontiguousarray(np.transpose(_as4(wt, "filters"), (3, 0, 1, 2)))


def zero_pad_hw(x, ph, pw):
    x = _as4(x)
    if ph < 0 or pw < 0:
        raise ValueError("padding must be non-negative")
    n, h, w, c = x.shape
    out = np.zeros((n, h + 2 * ph, w + 2 * pw, c), dtype=x.dtype)
    out[:, ph:ph + h, pw:pw + w, :] = x
    return out


def zero_insert_hw(y, sh, sw):
    """Insert ``stride - 1`` zeros between neighbouring rows and columns."""
    y = _as4(y)
    if sh < 1 or sw < 1:
        raise ValueError("strides must be >= 1")
    n, h, w, c = y.shape
    hp = h + (h - 1) * (sh - 1) if h else 0
    wp = w + (w - 1) * (sw - 1) if w else 0
    out = np.zeros((n, hp, wp, c), dtype=y.dtype)
    out[:, ::sh, ::sw, :] = y
    return out
