import numpy as np
import pytest

from schur_interp import NevanlinnaPickData, SarasonData, build_nevanlinna_pick, build_sarason


def np_problem(points, values):
    return NevanlinnaPickData(points, [np.atleast_2d(v) for v in values])


@pytest.fixture
def golden_a():
    """One node, 0 -> 0."""
    prob = np_problem([0.0], [0.0])
    return prob, build_nevanlinna_pick(prob)


@pytest.fixture
def golden_b():
    """0 -> 0 and 1/2 -> 1/2: rank-one Pick matrix, unique solution s(z) = z."""
    prob = np_problem([0.0, 0.5], [0.0, 0.5])
    return prob, build_nevanlinna_pick(prob)


@pytest.fixture
def sarason_zero():
    prob = SarasonData((0.0, 0.5), np.zeros((2, 2)))
    return prob, build_sarason(prob)


@pytest.fixture
def grid16():
    r = np.array([0.3, 0.6, 0.85, 0.95])
    th = 2 * np.pi * (np.arange(4) + 0.37) / 4
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()
