"""Conservativity and sharp-equation residuals."""

import logging

import numpy as np

from dualflow.config import VERIFY_STENCIL_ORDER
from dualflow.errors import PreconditionError
from dualflow.framework.entropy import sharp
from dualflow.framework.numerics import frobenius
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


def constraint_violation(model, v: np.ndarray, ops: DifferenceOperators) -> float:
    """max |lc v| over all cells (0 when Z = 0)."""
    if model.Z == 0:
        return 0.0
    return float(np.max(np.abs(model.lc_apply(v, ops))))


def conservativity_residual(
    model,
    v: np.ndarray,
    order: int = VERIFY_STENCIL_ORDER,
    constraint_tol: float = 1e-8,
) -> float:
    """
    |int F(v) : L*(v#) dx| on one spatial slice.

    Args:
        model: The ModelSpec.
        v: Slice of shape (Nx, n) in the interior of dom F.
        order: Stencil order.
        constraint_tol: Admissible max |lc v|.

    Returns:
        The absolute residual.

    Raises:
        PreconditionError: If lc v exceeds the tolerance.
        DomainError: If v leaves the interior of dom F.
    """
    v = np.asarray(v, dtype=float)
    Nx = v.shape[0]
    ops = DifferenceOperators.build(Nx, 1.0 / Nx, order)
    violation = constraint_violation(model, v, ops)
    if violation > constraint_tol:
        raise PreconditionError(
            f"{model.name}: constraint violated by {violation:.3e} (tolerance {constraint_tol:.1e})"
        )
    vs = sharp(model, v)
    density = frobenius(model.F(v), model.Lstar_apply(vs, ops))
    return float(abs(np.sum(density) / Nx))


def sharp_defect(model, grid, v: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
    """
    R = dt v# + L*(v#) : dF(v) at every node (centered time differences).

    Returns:
        Array of shape (Nt + 1, Nx, n); lc* pi = R for a strong solution.
    """
    vs = sharp(model, v)
    dvs = np.gradient(vs, grid.dt, axis=0, edge_order=2) if grid.Nt >= 2 else (vs[1:] - vs[:1]) / grid.dt
    S = model.Lstar_apply(vs, ops)
    return dvs + np.einsum("...ij,...lij->...l", S, model.dF(v))


def reconstruct_multiplier(model, grid, v: np.ndarray, ops: DifferenceOperators):
    """The multiplier pi of the sharp equation; None when Z = 0."""
    if model.Z == 0:
        return None
    return model.multiplier(sharp_defect(model, grid, v, ops), ops)


def sharp_residual(model, record, weight, order: int = None) -> float:
    """
    Max over components, interior nodes and cells of the weighted sharp residual.

    The residual is h v# + dt(H v#) + H L*(v#) : dF(v) - H lc* pi, with dt by
    centered differences.

    Args:
        model: The ModelSpec.
        record: StrongSolutionRecord.
        weight: WeightProfile on the record's interval.
        order: Stencil order; defaults to the record's.

    Returns:
        The max absolute residual (0 for fewer than 3 nodes).
    """
    grid = record.grid
    if grid.Nt < 2:
        return 0.0
    ops = DifferenceOperators.for_grid(grid, record.order if order is None else order)
    v = record.v.values
    h = weight.h_samples(grid)[:, None, None]
    H = weight.H_samples(grid)[:, None, None]
    vs = sharp(model, v)
    dHvs = (H[2:] * vs[2:] - H[:-2] * vs[:-2]) / (2 * grid.dt)
    inner = slice(1, -1)
    flux = np.einsum("...ij,...lij->...l", model.Lstar_apply(vs[inner], ops), model.dF(v[inner]))
    residual = h[inner] * vs[inner] + dHvs + H[inner] * flux
    if record.pi is not None:
        residual = residual - H[inner] * model.lcstar_apply(record.pi[inner], ops)
    return float(np.max(np.abs(residual)))
