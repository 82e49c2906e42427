import numpy as np
import pytest

from cks import backend
from cks.geometry import ConvGeometry


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=backend.available())
def backend_name(request):
    return request.param


@pytest.fixture
def hand():
    """Height-4 single-channel case worked out by hand.

    X = [1, 2, 3, 4], W = [2, 3], stride 2, no padding:
    Y = [1*2 + 2*3, 3*2 + 4*3] = [8, 18]; with dY = [1, 10]:
    dX = [2, 3, 20, 30], dW = [1 + 30, 2 + 40] = [31, 42].
    """
    g = ConvGeometry.infer(n=1, ih=4, iw=1, ic=1, oc=1, fh=2, fw=1, sh=2, sw=1, ph=0, pw=0)
    return {
        "g": g,
        "x": np.array([1.0, 2, 3, 4]).reshape(g.x_shape),
        "w": np.array([2.0, 3]).reshape(g.w_shape),
        "dy": np.array([1.0, 10]).reshape(g.y_shape),
        "y": [8.0, 18.0],
        "dx": [2.0, 3.0, 20.0, 30.0],
        "dw": [31.0, 42.0],
    }


# N=1, 5x5 input, 1->1 channels, 3x3 filter, stride 3, padding 1 -> 2x2 output
FIG4 = ConvGeometry.square(1, 5, 1, 1, 3, s=3, p=1)
# 4x4 input, 3x3 filter, stride 2, padding 1 -> 2x2 output gradient
FIG5 = ConvGeometry.square(1, 4, 1, 1, 3, s=2, p=1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
