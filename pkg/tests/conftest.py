"""Shared fixtures: small grids, the four models and manufactured records."""

import numpy as np
import pytest

from dualflow.framework import WeightProfile
from dualflow.grid import DifferenceOperators, SpaceTimeGrid
from dualflow.models import MODELS, Scenario, TrigSeries, get_model, manufacture_strong_solution


@pytest.fixture
def small_grid():
    return SpaceTimeGrid(16, 8, 0.5)


@pytest.fixture(params=MODELS)
def model(request):
    return get_model(request.param)


@pytest.fixture
def burgers():
    return get_model("burgers")


@pytest.fixture
def barotropic():
    return get_model("barotropic")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_state(model, Nx: int, order: int = 4, amplitude: float = 0.05) -> np.ndarray:
    """Constraint-consistent smooth slice of shape (Nx, n)."""
    x = (np.arange(Nx) + 0.5) / Nx
    if model.name == "burgers":
        return (amplitude * np.sin(2 * np.pi * x))[:, None]
    ops = DifferenceOperators.build(Nx, 1.0 / Nx, order)
    rho = 1.0 + amplitude * np.cos(2 * np.pi * x)
    q = amplitude * np.sin(4 * np.pi * x)
    return model.from_primitive(q, rho, ops)


@pytest.fixture
def stationary_record(barotropic):
    """q = 0, rho = 1 on [0, 0.5]: the log-pressure barotropic rest state."""
    return manufacture_strong_solution(barotropic, Scenario("stationary_state", 0.5), 8, 8, order=2)


@pytest.fixture
def burgers_record(burgers):
    scenario = Scenario("burgers_characteristics", 0.1, TrigSeries.parse("sin:1:0.1"))
    return manufacture_strong_solution(burgers, scenario, 32, 16)


@pytest.fixture
def constant_weight():
    return WeightProfile.constant(0.5)
