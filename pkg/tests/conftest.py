import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from circle_map import SineDrive  # noqa: E402
from constants import EMPIRICAL, build_profile  # noqa: E402
from orbit import OrbitTrace  # noqa: E402


def make_profile(L=1000.0, sigma=0.05, delta0=0.01, delta=0.002, lambda_=0.1, alpha=None, N=20, K0=50.0):
    overrides = {"sigma": sigma, "delta0": delta0, "delta": delta, "lambda": lambda_}
    return build_profile(SineDrive(), L, alpha=alpha, N=N, kind=EMPIRICAL, overrides=overrides, K0=K0)


def make_trace(dist, log_deriv=None, points=None, nearest=None, L=1000.0, critical_index=0):
    """
    A hand-built trace: only the arrays a test cares about need to be given
    """
    dist = np.asarray(dist, dtype=float)
    horizon = len(dist) - 1
    if log_deriv is None:
        log_deriv = np.arange(horizon + 1) * 5.0
    log_deriv = np.asarray(log_deriv, dtype=float)
    log_step = np.append(np.diff(log_deriv), 0.0)
    if points is None:
        points = np.full(horizon + 1, 0.5)
    if nearest is None:
        nearest = np.zeros(horizon + 1, dtype=int)
    ones = np.ones(horizon + 1)
    return OrbitTrace(origin=0.25, critical_index=critical_index, a=0.0, L=L, points=np.asarray(points, dtype=float),
                      log_deriv=log_deriv, signs=ones, log_step=log_step, step_signs=ones, dist=dist,
                      nearest=np.asarray(nearest), horizon=horizon)


@pytest.fixture
def sine():
    return SineDrive()


@pytest.fixture
def profile_factory():
    return make_profile


@pytest.fixture
def trace_factory():
    return make_trace
