import math

import numpy as np
import pytest

from logcave import _pykernels, conjugate
from logcave.bodies import ConvexBody
from logcave.grid import Grid
from logcave.logconcave import from_potential

try:
    from logcave import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels, "cython": _ckernels}


@pytest.fixture(params=["cython", "python"])
def backend(request, monkeypatch):
    """Run the test once with each conjugation kernel."""
    mod = BACKENDS[request.param]
    if mod is None:
        pytest.skip("compiled kernels not built")
    monkeypatch.setattr(conjugate, "kernels", mod)
    return request.param


SQRT2PI = math.sqrt(2 * math.pi)
LOG_C1 = -0.5 * math.log(2 * math.pi)
UNIT = ConvexBody(interval=(-1.0, 1.0))
BODY_GRID = Grid([-1.0], [1.0], [4001])


@pytest.fixture(scope="session")
def half_gauss():
    return from_potential(lambda x: x**2 / 2)


@pytest.fixture(scope="session")
def quartic():
    return from_potential(lambda x: x**4 / 4 + x**2 / 10, Grid([-6], [6], [4001]))


@pytest.fixture(scope="session")
def logcos():
    """``cos(pi x / 2)`` on [-1, 1]: vanishes on the boundary."""
    return from_potential(lambda x: -np.log(np.cos(np.pi * x / 2)), BODY_GRID, body=UNIT)


@pytest.fixture(scope="session")
def semicircle():
    """``exp(sqrt(1 - x^2))`` on [-1, 1]: boundary value 1."""
    return from_potential(lambda x: -np.sqrt(np.clip(1 - x**2, 0, None)), BODY_GRID, body=UNIT)
