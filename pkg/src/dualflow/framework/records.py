"""Strong solutions as data records."""

import logging
from dataclasses import dataclass, field

import numpy as np

from dualflow.config import VERIFY_STENCIL_ORDER
from dualflow.errors import ConsistencyError, StructuralError
from dualflow.framework.entropy import EntropyTimeline, sharp, total_entropy
from dualflow.framework.numerics import min_eigenvalue
from dualflow.framework.residuals import reconstruct_multiplier, sharp_residual
from dualflow.framework.weights import WeightProfile
from dualflow.grid.fields import StateField
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


def node_min_eigenvalues(model, v: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
    """min over cells of lambda_min(L*(v#)) at every node."""
    return min_eigenvalue(model.Lstar_apply(sharp(model, v), ops)).min(axis=-1)


@dataclass(frozen=True)
class StrongSolutionRecord:
    """
    A strong solution sampled on a grid.

    Attributes:
        grid: The space-time grid.
        v: States in the interior of dom F, shape (Nt + 1, Nx, n).
        pi: Constraint multiplier, shape (Nt + 1, Nx, Z); None when Z = 0.
        lambda_min: Per-node minimum eigenvalue of L*(v#).
        order: Stencil order the record was built with.
        model_name: Name of the generating model.
        scenario: Free-form description of the data.
    """

    grid: SpaceTimeGrid
    v: StateField
    pi: np.ndarray = None
    lambda_min: np.ndarray = None
    order: int = VERIFY_STENCIL_ORDER
    model_name: str = ""
    scenario: str = ""
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        model,
        grid: SpaceTimeGrid,
        v: np.ndarray,
        order: int = VERIFY_STENCIL_ORDER,
        pi: np.ndarray = None,
        scenario: str = "",
        meta: dict = None,
    ) -> "StrongSolutionRecord":
        """
        Assemble a record, reconstructing pi and the positivity margin.

        Raises:
            DomainError: If v leaves the interior of dom F.
            StructuralError: If shapes do not match the grid.
        """
        field_ = v if isinstance(v, StateField) else StateField(v, model.labels)
        field_.check_grid(grid, model.n)
        model.check_domain(field_.values, interior=True)
        ops = DifferenceOperators.for_grid(grid, order)
        if pi is None and model.Z > 0:
            pi = reconstruct_multiplier(model, grid, field_.values, ops)
        if pi is not None:
            pi = np.array(pi, dtype=float)
            if pi.shape != (grid.Nt + 1, grid.Nx, model.Z):
                raise StructuralError(f"multiplier shape {pi.shape} does not match the grid")
        lam = node_min_eigenvalues(model, field_.values, ops)
        return cls(grid, field_, pi, lam, order, model.name, scenario, dict(meta or {}))

    def restrict(self, T1: float) -> "StrongSolutionRecord":
        """The record on [0, T1]; T1 must be a grid node."""
        sub = self.grid.restrict(T1)
        k1 = sub.Nt + 1
        values = self.v.values[:k1]
        pi = None if self.pi is None else self.pi[:k1]
        lam = None if self.lambda_min is None else self.lambda_min[:k1]
        return StrongSolutionRecord(
            sub, StateField(values, self.v.labels), pi, lam, self.order, self.model_name, self.scenario, dict(self.meta)
        )

    @property
    def positivity_margin(self) -> float:
        """Smallest c >= 0 with (T - t) L*(v#) + c I positive semidefinite."""
        if self.lambda_min is None:
            return 0.0
        tail = self.grid.T - self.grid.t
        return float(max(0.0, -np.min(tail * self.lambda_min)))

    def vsharp(self, model) -> np.ndarray:
        return sharp(model, self.v.values)

    def entropy(self, model) -> EntropyTimeline:
        return total_entropy(model, self.grid, self.v)

    def validate(
        self,
        model,
        weight: WeightProfile = None,
        entropy_tol: float = 1e-6,
        sharp_tol: float = 1e-3,
    ) -> dict:
        """
        Check the record invariants.

        Args:
            model: The generating ModelSpec.
            weight: Weight for the sharp residual; constant weight by default.
            entropy_tol: Bound on the relative entropy drift.
            sharp_tol: Bound on the weighted sharp residual.

        Returns:
            Dict with "entropy_drift" and "sharp_residual".

        Raises:
            DomainError: If v leaves the interior of dom F.
            ConsistencyError: If a residual exceeds its tolerance.
        """
        if model.name != self.model_name:
            raise StructuralError(f"record was built by {self.model_name!r}, not {model.name!r}")
        model.check_domain(self.v.values, interior=True)
        weight = weight or WeightProfile.constant(self.grid.T)
        drift = self.entropy(model).drift()
        residual = sharp_residual(model, self, weight)
        report = {"entropy_drift": drift, "sharp_residual": residual}
        logger.debug("record %s/%s: %s", self.model_name, self.scenario, report)
        if drift > entropy_tol:
            raise ConsistencyError(f"entropy drift {drift:.3e} exceeds {entropy_tol:.1e}")
        if residual > sharp_tol:
            raise ConsistencyError(f"sharp residual {residual:.3e} exceeds {sharp_tol:.1e}")
        return report
