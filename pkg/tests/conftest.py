"""Shared fixtures: one default configuration and one cloud/grid pair.

The heavy objects are session scoped; tests must not mutate them
(PhysicalConfig and PhaseMask values are treated as read-only).
"""

import math

import numpy as np
import pytest

from gemscope import (
    Grid2D,
    build_cloud,
    ideal_prism_mask,
    paper_defaults,
)

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def cfg():
    return paper_defaults()


@pytest.fixture(scope="session")
def grid(cfg):
    return Grid2D.for_cloud(cfg)


@pytest.fixture(scope="session")
def cloud(cfg, grid):
    return build_cloud(cfg, grid)


@pytest.fixture(scope="session")
def prism(cfg, grid):
    return ideal_prism_mask(cfg, grid)


def moment_center(angles: np.ndarray, values: np.ndarray) -> float:
    """Intensity-weighted mean angle; cheap fit-free peak locator."""
    w = np.clip(values, 0.0, None)
    return float(np.sum(angles * w) / np.sum(w))


def moment_sigma(angles: np.ndarray, values: np.ndarray) -> float:
    w = np.clip(values, 0.0, None)
    mean = np.sum(angles * w) / np.sum(w)
    return float(np.sqrt(np.sum((angles - mean) ** 2 * w) / np.sum(w)))
