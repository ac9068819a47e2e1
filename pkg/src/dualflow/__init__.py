"""dualflow: dual variational solutions of conservative PDE systems."""

from dualflow.errors import (
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
    DualflowError,
    HorizonError,
    PreconditionError,
    StructuralError,
    WeightError,
)
from dualflow.grid import DifferenceOperators, SpaceTimeGrid
from dualflow.framework import StrongSolutionRecord, WeightProfile, adapt_weight
from dualflow.models import Scenario, TrigSeries, get_model, manufacture_strong_solution
from dualflow.dual_solver import SolverConfig, solve
from dualflow.consistency import build_optimal_pair, verify_certificate
from dualflow.burgers_exact import entropy_solution, shock_free_substitute, verify_proposition
from dualflow.dafermos import compare

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError",
    "ConsistencyError",
    "ConvergenceError",
    "DomainError",
    "DualflowError",
    "HorizonError",
    "PreconditionError",
    "StructuralError",
    "WeightError",
    "DifferenceOperators",
    "SpaceTimeGrid",
    "StrongSolutionRecord",
    "WeightProfile",
    "adapt_weight",
    "Scenario",
    "TrigSeries",
    "get_model",
    "manufacture_strong_solution",
    "SolverConfig",
    "solve",
    "build_optimal_pair",
    "verify_certificate",
    "entropy_solution",
    "shock_free_substitute",
    "verify_proposition",
    "compare",
]
