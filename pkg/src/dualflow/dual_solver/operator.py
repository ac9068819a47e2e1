"""The space-time constraint operator of the relaxed primal problem and its transpose."""

import logging
from dataclasses import dataclass

import numpy as np

from dualflow.config import POWER_ITERATIONS, SOLVER_STENCIL_ORDER
from dualflow.errors import StructuralError
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstraintOperator:
    """
    Linear map A(v, M) = (r_a, r_w) on the slabs of a grid.

    Primal unknowns are v_k and M_k for the slabs k = 0..Nt-1 (left nodes).
    The rows are

        r_a[0] = -v_0 / dt
        r_a[j] = (v_{j-1} - v_j) / dt + L M_{j-1},   j = 1..Nt-1
        r_w[k] = lc v_k

    so A(v, M) = A(v0, 0) encodes v_0 = v0, the dynamics and the linear
    constraint. The transpose maps the multipliers (a, w) to

        E_k = (a_{k+1} - a_k) / dt + lc* w_k,   B_k = L* a_{k+1},   a_Nt = 0.

    Attributes:
        model: The ModelSpec.
        grid: The space-time grid.
        ops: Stencils on the grid.
    """

    model: object
    grid: SpaceTimeGrid
    ops: DifferenceOperators

    @property
    def primal_shapes(self):
        g, m = self.grid, self.model
        return (g.Nt, g.Nx, m.n), (g.Nt, g.Nx, m.N, m.N)

    @property
    def dual_shapes(self):
        g, m = self.grid, self.model
        return (g.Nt, g.Nx, m.n), (g.Nt, g.Nx, m.Z)

    def _check(self, arrays, shapes, what):
        for array, shape in zip(arrays, shapes):
            if np.shape(array) != shape:
                raise StructuralError(f"{what} has shape {np.shape(array)}, expected {shape}")

    def apply(self, v: np.ndarray, M: np.ndarray):
        """A(v, M) as the pair (r_a, r_w)."""
        self._check((v, M), self.primal_shapes, "primal block")
        dt = self.grid.dt
        r_a = np.empty_like(v)
        r_a[0] = -v[0] / dt
        if self.grid.Nt > 1:
            r_a[1:] = (v[:-1] - v[1:]) / dt + self.model.L_apply(M[:-1], self.ops)
        r_w = self.model.lc_apply(v, self.ops)
        return r_a, r_w

    def adjoint(self, a: np.ndarray, w: np.ndarray):
        """A^T(a, w) as the pair (E, B) on the slabs."""
        self._check((a, w), self.dual_shapes, "dual block")
        dt = self.grid.dt
        shifted = np.zeros_like(a)
        shifted[:-1] = a[1:]
        E = (shifted - a) / dt + self.model.lcstar_apply(w, self.ops)
        B = self.model.Lstar_apply(shifted, self.ops)
        return E, B

    def rhs(self, v0: np.ndarray):
        """Right-hand side A(v0 on every slab, 0)."""
        v = np.broadcast_to(v0, self.primal_shapes[0]).copy()
        return self.apply(v, np.zeros(self.primal_shapes[1]))

    def norm(self, iterations: int = POWER_ITERATIONS, seed: int = 0) -> float:
        """Operator norm estimate from power iteration on A^T A."""
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(self.primal_shapes[0])
        M = rng.standard_normal(self.primal_shapes[1])
        M = 0.5 * (M + np.swapaxes(M, -1, -2))
        estimate = 0.0
        for _ in range(iterations):
            size = np.sqrt(np.sum(v**2) + np.sum(M**2))
            v, M = v / size, M / size
            v, M = self.adjoint(*self.apply(v, M))
            estimate = np.sqrt(np.sqrt(np.sum(v**2) + np.sum(M**2)))
        logger.debug("power iteration: |A| ~ %.6g after %d steps", estimate, iterations)
        return float(estimate)

    def adjointness_defect(self, pairs: int = 4, seed: int = 0) -> float:
        """
        Worst relative defect of <A x, y> = <x, A^T y> over random pairs.

        Returns:
            max |<A x, y> - <x, A^T y>| / (|x| |y|).
        """
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(pairs):
            v = rng.standard_normal(self.primal_shapes[0])
            M = rng.standard_normal(self.primal_shapes[1])
            M = 0.5 * (M + np.swapaxes(M, -1, -2))
            a = rng.standard_normal(self.dual_shapes[0])
            w = rng.standard_normal(self.dual_shapes[1])
            r_a, r_w = self.apply(v, M)
            E, B = self.adjoint(a, w)
            lhs = np.sum(r_a * a) + np.sum(r_w * w)
            rhs = np.sum(v * E) + np.sum(M * B)
            scale = np.sqrt(np.sum(v**2) + np.sum(M**2)) * np.sqrt(np.sum(a**2) + np.sum(w**2))
            worst = max(worst, abs(lhs - rhs) / scale)
        return float(worst)


def assemble_constraint_operator(model, grid: SpaceTimeGrid, weight=None, order: int = SOLVER_STENCIL_ORDER) -> ConstraintOperator:
    """
    Build the constraint operator of the relaxed primal problem.

    Args:
        model: The ModelSpec.
        grid: The space-time grid.
        weight: Optional WeightProfile; checked against the grid when given.
        order: Stencil order.

    Returns:
        The ConstraintOperator.

    Raises:
        StructuralError: If the weight lives on another horizon.
    """
    if weight is not None:
        weight.h_samples(grid)
    return ConstraintOperator(model, grid, DifferenceOperators.for_grid(grid, order))
