"""Shared fixtures: grids, seeded streams and small simulated data sets."""

import numpy as np
import pytest

from stable_tmle.core.sampling import OUParams, RngStream, sample_ou_path, sample_stable
from stable_tmle.core.stable_model import StableParams
from stable_tmle.core.trig_projection import IID_GRID, OU_GRID

REFERENCE_THETA = StableParams(mu=0.0, sigma=1.0, alpha=1.3, beta=0.0)
REFERENCE_OU = OUParams(alpha=1.5, sigma=1.0, lam=1.0)


@pytest.fixture
def rng():
    """Fresh stream factory so each test controls its own stream ids."""

    def make(stream_id: int = 0, seed: int = 20240601) -> RngStream:
        return RngStream(seed, stream_id=stream_id)

    return make


@pytest.fixture
def small_grid():
    """11 points (0.01, 0.51, ..., 5.01); well conditioned and fast."""
    return IID_GRID.subgrid(10)


@pytest.fixture
def small_ou_grid():
    """6 points (0.05, 1.05, ..., 5.05)."""
    return OU_GRID.subgrid(20)


@pytest.fixture
def stable_sample():
    return sample_stable(1000, REFERENCE_THETA, RngStream(7))


@pytest.fixture
def ou_path():
    return sample_ou_path(REFERENCE_OU, 0.1, 1000, RngStream(11))


def max_abs(x) -> float:
    return float(np.max(np.abs(x)))
