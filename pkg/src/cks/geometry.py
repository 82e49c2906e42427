"""Conv-layer geometry, zero-proportion analytics and flop formulas."""
import json
import os
from dataclasses import asdict, dataclass, field

OPS = ("conv", "deconv", "dilated")


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ConvGeometry:
    """Every parameter of a 2-D conv-layer, with derived output extents.

    Build through :meth:`infer`; the constructor validates but expects
    ``oh``/``ow`` to be consistent when passed explicitly.
    """

    n: int
    ih: int
    iw: int
    ic: int
    oc: int
    fh: int
    fw: int
    sh: int = 1
    sw: int = 1
    ph: int = 0
    pw: int = 0
    oh: int = field(default=0, compare=False)
    ow: int = field(default=0, compare=False)

    def __post_init__(self):
        for name in ("n", "ih", "iw", "ic", "oc", "fh", "fw"):
            if getattr(self, name) < 1:
                raise GeometryError(f"{name} must be positive, got {getattr(self, name)}")
        if self.sh < 1 or self.sw < 1:
            raise GeometryError(f"strides must be >= 1, got ({self.sh}, {self.sw})")
        if self.ph < 0 or self.pw < 0:
            raise GeometryError(f"paddings must be non-negative, got ({self.ph}, {self.pw})")
        if self.ph >= self.fh or self.pw >= self.fw:
            raise GeometryError(
                f"padding ({self.ph}, {self.pw}) must be smaller than the filter ({self.fh}, {self.fw})")
        if self.fh > self.ih + 2 * self.ph or self.fw > self.iw + 2 * self.pw:
            raise GeometryError(
                f"filter ({self.fh}, {self.fw}) exceeds padded input "
                f"({self.ih + 2 * self.ph}, {self.iw + 2 * self.pw})")
        oh = (self.ih + 2 * self.ph - self.fh) // self.sh + 1
        ow = (self.iw + 2 * self.pw - self.fw) // self.sw + 1
        if self.oh == 0 and self.ow == 0:
            object.__setattr__(self, "oh", oh)
            object.__setattr__(self, "ow", ow)
        elif (self.oh, self.ow) != (oh, ow):
            raise GeometryError(f"output extents ({self.oh}, {self.ow}) != derived ({oh}, {ow})")

    @classmethod
    def infer(cls, n, ih, iw, ic, oc, fh, fw, sh=1, sw=1, ph=0, pw=0):
        return cls(n, ih, iw, ic, oc, fh, fw, sh, sw, ph, pw)

    @classmethod
    def square(cls, n, i, ic, oc, f, s=1, p=0):
        return cls(n, i, i, ic, oc, f, f, s, s, p, p)

    @property
    def oh_p(self):
        """Height of the output gradient after zero insertion."""
        return self.oh + (self.oh - 1) * (self.sh - 1)

    @property
    def ow_p(self):
        return self.ow + (self.ow - 1) * (self.sw - 1)

    @property
    def x_shape(self):
        return (self.n, self.ih, self.iw, self.ic)

    @property
    def y_shape(self):
        return (self.n, self.oh, self.ow, self.oc)

    @property
    def w_shape(self):
        return (self.oc, self.fh, self.fw, self.ic)

    def to_dict(self):
        d = asdict(self)
        del d["oh"], d["ow"]
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        keys = ("n", "ih", "iw", "ic", "oc", "fh", "fw", "sh", "sw", "ph", "pw")
        unknown = set(d) - set(keys) - {"oh", "ow"}
        if unknown:
            raise GeometryError(f"unknown geometry fields {sorted(unknown)}")
        return cls(**{k: int(d[k]) for k in keys if k in d})

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def describe(self):
        return (f"N={self.n} I={self.ih}x{self.iw} C={self.ic}->{self.oc} F={self.fh}x{self.fw} "
                f"s=({self.sh},{self.sw}) p=({self.ph},{self.pw}) O={self.oh}x{self.ow}")


def pad_zero_fraction(g):
    """Share of padded zeros in the zero-padded input."""
    return 1.0 - (g.ih * g.iw) / ((g.ih + 2 * g.ph) * (g.iw + 2 * g.pw))


def nonzero_calc_fraction(g):
    """Share of non-zero terms once the output gradient is zero-inserted."""
    return (g.oh * g.ow) / (g.oh_p * g.ow_p)


def flops(g, op, include_batch=True):
    """Time-complexity (2 flops per MAC) of ``op`` on geometry ``g``.

    The dilated formula is commonly printed without the batch factor;
    ``include_batch=False`` gives that reading.
    """
    if op == "conv":
        return 2 * g.oc * g.n * g.oh * g.ow * g.fh * g.fw * g.ic
    if op == "deconv":
        return 2 * g.ic * g.n * g.ih * g.iw * g.fh * g.fw * g.oc
    if op == "dilated":
        t = 2 * g.oc * g.fh * g.fw * g.ic * g.oh_p * g.ow_p
        return t * g.n if include_batch else t
    raise ValueError(f"unknown operator {op!r}; expected one of {OPS}")


@dataclass(frozen=True)
class GzPolicy:
    lower_bound: int = 1
    upper_bound: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        if not 1 <= self.lower_bound <= self.upper_bound:
            raise ValueError(f"need 1 <= lower ({self.lower_bound}) <= upper ({self.upper_bound})")


def select_gz(n_alpha, n_beta, n_gamma, policy=None):
    """Segment count for the partitioned weight-gradient reduction.

    Grows with the work of the two feature-map-sized operators relative to the
    weight-gradient operator, clamped to the policy bounds.
    """
    policy = policy or GzPolicy()
    if min(n_alpha, n_beta, n_gamma) < 1:
        raise ValueError("block counts must be positive")
    # half-up rounding keeps the selection monotone
    gz = int((n_alpha + n_beta) / n_gamma + 0.5)
    return max(policy.lower_bound, min(policy.upper_bound, gz))
