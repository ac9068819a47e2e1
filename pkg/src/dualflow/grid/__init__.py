"""Space-time grid, quadrature, periodic stencils and field containers."""

from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import (
    DifferenceOperators,
    StencilOperator,
    adjointness_check,
    apply_stencil,
    derivative,
    identity,
    mean,
    second_derivative,
)
from dualflow.grid.fields import MatrixField, StateField, symmetrize

__all__ = [
    "SpaceTimeGrid",
    "DifferenceOperators",
    "StencilOperator",
    "adjointness_check",
    "apply_stencil",
    "derivative",
    "identity",
    "mean",
    "second_derivative",
    "MatrixField",
    "StateField",
    "symmetrize",
]
