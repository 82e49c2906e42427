"""A conv2d layer wired to the zero-skipping operators, plus gradient checks."""
import csv
import math
from dataclasses import dataclass

import numpy as np

from . import dispatch, oracle, ops
from .geometry import ConvGeometry
from .tensor import ShapeError


class LayerStateError(RuntimeError):
    pass


class TrainingError(RuntimeError):
    pass


def init_weights(g, rng, dtype=np.float64):
    k = (g.fh * g.fw * g.ic) ** -0.5
    return rng.uniform(-k, k, size=g.w_shape).astype(dtype)


class Conv2dLayer:
    """Convolution forward, deconvolution and dilated convolution backward.

    ``impl="oracle"`` swaps every operator for its brute-force reference.
    With ``cache_split=True`` the kernel split of the weights is kept between
    backward calls until the weights change.
    """

    def __init__(self, geometry, weights=None, *, seed=0, dtype=np.float64, impl="cks",
                 policy=dispatch.DEFAULT_POLICY, cache_split=False, nthreads=1, backend_name=None):
        if impl not in ("cks", "oracle"):
            raise ValueError(f"impl must be 'cks' or 'oracle', got {impl!r}")
        self.geometry = geometry
        self.dtype = np.dtype(dtype)
        if weights is None:
            weights = init_weights(geometry, np.random.default_rng(seed), self.dtype)
        self.weights = np.ascontiguousarray(weights, dtype=self.dtype)
        if self.weights.shape != geometry.w_shape:
            raise ShapeError(f"weights {self.weights.shape} do not match geometry {geometry.w_shape}")
        self.impl = impl
        self.policy = policy
        self.cache_split = cache_split
        self._opts = {"nthreads": nthreads, "backend_name": backend_name}
        self._x = None
        self._split = None
        self._split_src = None

    def _geometry_for(self, x):
        g = self.geometry
        if x.shape == g.x_shape:
            return g
        if x.ndim == 4 and x.shape[1:] == g.x_shape[1:]:
            d = g.to_dict()
            d["n"] = x.shape[0]
            return ConvGeometry.from_dict(d)
        raise ShapeError(f"input {x.shape} does not fit geometry {g.describe()}")

    def forward(self, x):
        x = np.ascontiguousarray(x, dtype=self.dtype)
        g = self._geometry_for(x)
        if self.impl == "oracle":
            y, _ = oracle.naive_conv2d(x, self.weights, g)
        else:
            y, _ = dispatch.dispatch_conv(x, self.weights, g, self.policy, **self._opts)
        self._x = x
        return y

    def _kernel_split(self, g):
        if not self.cache_split:
            return None
        if self._split is None or self._split_src is not self.weights or not self._split.matches(g):
            self._split = ops.ks_split(self.weights, g)
            self._split_src = self.weights
        return self._split

    def backward(self, dy):
        """Return ``(dx, dw)`` for the input cached by the last :meth:`forward`."""
        if self._x is None:
            raise LayerStateError("backward called before forward")
        g = self._geometry_for(self._x)
        dy = np.ascontiguousarray(dy, dtype=self.dtype)
        if dy.shape != g.y_shape:
            raise ShapeError(f"output gradient {dy.shape} != forward output {g.y_shape}")
        if self.impl == "oracle":
            dx, _ = oracle.naive_deconv2d(dy, self.weights, g)
            dw, _ = oracle.naive_dilated_conv2d(self._x, dy, g)
        else:
            dx, _ = dispatch.dispatch_deconv(dy, self.weights, g, self.policy,
                                             kernel_split=self._kernel_split(g), **self._opts)
            dw, _ = dispatch.dispatch_dilated(self._x, dy, g, self.policy, **self._opts)
        return dx, dw


def quadratic_loss(target=None):
    """``0.5 * sum((y - target)**2)`` returning ``(value, dL/dy)``."""
    def loss(y):
        r = y if target is None else y - target
        return 0.5 * float(np.sum(r * r)), r
    return loss


def grad_check(layer, x, loss=None, eps=1e-5, backward=None):
    """Max relative discrepancy between analytic and central-difference gradients.

    Covers every entry of ``x`` and of the layer weights.  The discrepancy of
    each gradient is ``max|analytic - numeric| / max(max|numeric|, tiny)``.
    ``backward`` overrides ``layer.backward`` (used for fault injection).
    """
    if layer.dtype != np.float64:
        raise ValueError("gradient checks need float64")
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    loss = loss or quadratic_loss()
    x = np.array(x, dtype=np.float64)
    w0 = layer.weights.copy()

    _, dl_dy = loss(layer.forward(x))
    dx, dw = (backward or layer.backward)(dl_dy)

    def value():
        return loss(layer.forward(x))[0]

    def numeric(arr):
        grad = np.zeros_like(arr)
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = value()
            flat[i] = orig - eps
            down = value()
            flat[i] = orig
            gflat[i] = (up - down) / (2 * eps)
        return grad

    try:
        num_dx = numeric(x)
        num_dw = numeric(layer.weights)
    finally:
        layer.weights[...] = w0
    errs = []
    for ana, num in ((dx, num_dx), (dw, num_dw)):
        scale = max(float(np.max(np.abs(num), initial=0.0)), float(np.max(np.abs(ana), initial=0.0)))
        diff = float(np.max(np.abs(ana - num), initial=0.0))
        errs.append(0.0 if diff == 0.0 else diff / max(scale, 1e-300))
    return max(errs)


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    steps: int = 500
    lr: float = 0.05
    samples: int = 8
    size: int = 8
    channels: tuple = (2, 4, 2)
    record_every: int = 10
    impl: str = "cks"
    dtype: str = "f64"


def _network(cfg, rng):
    c0, c1, c2 = cfg.channels
    g1 = ConvGeometry.square(cfg.samples, cfg.size, c0, c1, 3, s=1, p=1)
    g2 = ConvGeometry.square(cfg.samples, g1.oh, c1, c2, 3, s=2, p=1)
    dt = np.float32 if cfg.dtype == "f32" else np.float64
    return g1, g2, init_weights(g1, rng, dt), init_weights(g2, rng, dt)


def smoke_train(cfg=None, **overrides):
    """Fit a two-layer conv net to a fixed random teacher of the same shape.

    Full-batch gradient descent on a seeded synthetic set; returns
    ``[(step, loss), ...]`` recorded every ``record_every`` steps including the
    last one.  Loss is the mean over samples of ``0.5 * ||y - t||^2``.
    """
    cfg = cfg or TrainConfig()
    if overrides:
        cfg = TrainConfig(**{**cfg.__dict__, **overrides})
    rng = np.random.default_rng(cfg.seed)
    g1, g2, t1, t2 = _network(cfg, rng)
    _, _, w1, w2 = _network(cfg, rng)
    dt = w1.dtype
    x = rng.standard_normal(g1.x_shape).astype(dt)
    teacher1 = Conv2dLayer(g1, t1, dtype=dt, impl="oracle")
    teacher2 = Conv2dLayer(g2, t2, dtype=dt, impl="oracle")
    target = teacher2.forward(teacher1.forward(x))

    l1 = Conv2dLayer(g1, w1, dtype=dt, impl=cfg.impl)
    l2 = Conv2dLayer(g2, w2, dtype=dt, impl=cfg.impl)
    trace = []
    for step in range(cfg.steps + 1):
        y = l2.forward(l1.forward(x))
        r = y - target
        with np.errstate(over="ignore", invalid="ignore"):
            loss = 0.5 * float(np.sum(r * r)) / cfg.samples
        if not math.isfinite(loss):
            raise TrainingError(f"loss diverged at step {step}")
        if step % cfg.record_every == 0 or step == cfg.steps:
            trace.append((step, loss))
        if step == cfg.steps:
            break
        dh, dw2 = l2.backward(r / cfg.samples)
        _, dw1 = l1.backward(dh)
        l1.weights = l1.weights - cfg.lr * dw1
        l2.weights = l2.weights - cfg.lr * dw2
    return trace


def write_trace_csv(trace, fh):
    out = csv.writer(fh)
    out.writerow(["step", "loss"])
    for step, loss in trace:
        out.writerow([step, repr(loss)])
