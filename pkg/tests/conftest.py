"""Shared fixtures.

Expensive curve builds are session-scoped and shared across test modules;
the acceptance tests deliberately rebuild their own copies so that their
runtime checks time a cold construction.
"""

from __future__ import annotations

import numpy as np
import pytest

import _oracles as oracles
from ldgas import build_curve, integrate_j, integrate_psi, invert_curve


@pytest.fixture(scope="session")
def box_pair():
    return oracles.box_potential(), oracles.box_statistic()


@pytest.fixture(scope="session")
def quartic_pair():
    return oracles.quartic_potential(), oracles.quartic_statistic()


@pytest.fixture(scope="session")
def box_curve(box_pair):
    potential, statistic = box_pair
    curve = build_curve(potential, statistic, -3.0, 3.0, 801,
                        include=(0.25, 0.5, 1.5, 2.5))
    return integrate_j(curve)


@pytest.fixture(scope="session")
def box_rate_table(box_pair):
    # wider tilt range so the inverted x grid safely covers [-0.95, 0.95]
    potential, statistic = box_pair
    curve = integrate_j(build_curve(potential, statistic, -10.5, 10.5, 2101))
    return integrate_psi(invert_curve(curve))


@pytest.fixture(scope="session")
def quartic_curve(quartic_pair):
    potential, statistic = quartic_pair
    curve = build_curve(potential, statistic, -0.0095, 0.5, 401,
                        include=(1.0 / 32.0, 0.1))
    return integrate_j(curve)
