import numpy as np
import pytest

from relulip.network import Network
from relulip.numerics import Interval

ACCEPTANCE_LINES: list[str] = []


def net_from(*layers):
    """Build a network from ``(weights, bias)`` pairs."""
    return Network([w for w, _ in layers], [b for _, b in layers])


@pytest.fixture
def relu_net():
    # f(x) = relu(x)
    return net_from(([[1.0]], [0.0]), ([[1.0]], [0.0]))


@pytest.fixture
def abs_net():
    # f(x) = relu(x) + relu(-x) = |x|
    return net_from(([[1.0], [-1.0]], [0.0, 0.0]), ([[1.0, 1.0]], [0.0]))


@pytest.fixture
def x_minus_x_net():
    return net_from(([[1.0], [1.0]], [0.0, 0.0]), ([[1.0, -1.0]], [0.0]))


@pytest.fixture
def linear_net():
    return net_from(([[1.0, -2.0], [3.0, 4.0]], [0.0, 0.0]))


def unit_box(n):
    return [Interval(0.0, 1.0)] * n


def random_box(rng, n, width=1.0):
    centers = rng.uniform(-1.0, 1.0, n)
    widths = rng.uniform(0.2, width, n)
    return [Interval(c - w / 2, c + w / 2) for c, w in zip(centers, widths)]


def sample_box(rng, box, n):
    lo = np.array([iv.lo for iv in box])
    hi = np.array([iv.hi for iv in box])
    return rng.uniform(lo, hi, size=(n, len(box)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
