"""Concrete models: Burgers, barotropic Euler, QHD and Euler-Korteweg."""

from dualflow.errors import ConfigError
from dualflow.models.pressure import LogarithmicPressure, PowerPressure, PressureLaw, build_pressure
from dualflow.models.fluid import FluidModel
from dualflow.models.burgers import BurgersModel
from dualflow.models.barotropic import BarotropicModel
from dualflow.models.qhd import QhdModel
from dualflow.models.korteweg import KortewegModel
from dualflow.models.initial_data import TrigSeries, TrigTerm
from dualflow.models.manufacture import (
    SCENARIOS,
    Scenario,
    burgers_characteristics,
    burgers_horizon,
    lowner_convexity_defect,
    manufacture_strong_solution,
    sharp_equivalence_defect,
)

MODELS = ("burgers", "barotropic", "qhd", "korteweg")


def get_model(name: str, pressure: str = None, rho_min: float = None, s: float = -0.5, **pressure_params):
    """
    Build a model by name.

    Args:
        name: One of MODELS.
        pressure: Pressure law name for fluid models ("log", "adiabatic",
            "capillary", "power"); each model has its own default.
        rho_min: Density floor.
        s: Capillarity exponent (Korteweg only).
        **pressure_params: Parameters of the pressure law.

    Returns:
        The ModelSpec.

    Raises:
        ConfigError: On unknown names or invalid parameters.
    """
    law = None if pressure is None else build_pressure(pressure, **pressure_params)
    if name == "burgers":
        return BurgersModel() if rho_min is None else BurgersModel(rho_min)
    if name == "barotropic":
        return BarotropicModel(law, rho_min)
    if name == "qhd":
        return QhdModel(law, rho_min)
    if name == "korteweg":
        return KortewegModel(s, law, rho_min)
    raise ConfigError(f"unknown model {name!r}, expected one of {MODELS}", section="model", key="name")


__all__ = [
    "MODELS",
    "get_model",
    "LogarithmicPressure",
    "PowerPressure",
    "PressureLaw",
    "build_pressure",
    "FluidModel",
    "BurgersModel",
    "BarotropicModel",
    "QhdModel",
    "KortewegModel",
    "TrigSeries",
    "TrigTerm",
    "SCENARIOS",
    "Scenario",
    "burgers_characteristics",
    "burgers_horizon",
    "lowner_convexity_defect",
    "manufacture_strong_solution",
    "sharp_equivalence_defect",
]
