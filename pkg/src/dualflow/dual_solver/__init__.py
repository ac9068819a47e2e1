"""Discretized relaxed primal problem, its dual, and the primal-dual solver."""

from dualflow.dual_solver.operator import ConstraintOperator, assemble_constraint_operator
from dualflow.dual_solver.projection import ProjectionStats, project_epigraph
from dualflow.dual_solver.functional import (
    DualValue,
    cone_residual,
    dual_objective,
    eval_dual_functional,
    pairing,
    positive_ray_limit,
    scaled_dual_bound,
)
from dualflow.dual_solver.pdhg import (
    DualPair,
    DualReport,
    PrimalPair,
    SolverConfig,
    brenier_variables,
    feasible_primal,
    solve,
)

__all__ = [
    "ConstraintOperator",
    "assemble_constraint_operator",
    "ProjectionStats",
    "project_epigraph",
    "DualValue",
    "cone_residual",
    "dual_objective",
    "eval_dual_functional",
    "pairing",
    "positive_ray_limit",
    "scaled_dual_bound",
    "DualPair",
    "DualReport",
    "PrimalPair",
    "SolverConfig",
    "brenier_variables",
    "feasible_primal",
    "solve",
]
