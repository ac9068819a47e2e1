"""Recovery of v# from a dual density E through the tail integral of E."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from dualflow.config import SOLVER_STENCIL_ORDER
from dualflow.errors import StructuralError
from dualflow.framework.model import range_coefficients
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecoveredSharp:
    """
    v# reconstructed on the retained window [0, t_K].

    Attributes:
        t: Retained nodes.
        values: Shape (len(t), Nx, n), in ker lc and the resolved trig modes.
        gauge: Largest magnitude of the removed ran lc* component.
        defect: Largest relative size of the discarded high modes.
        truncated: Number of final nodes dropped where H vanishes.
    """

    t: np.ndarray
    values: np.ndarray
    gauge: float
    defect: float
    truncated: int


def tail_integral(grid: SpaceTimeGrid, E: np.ndarray, rule: str = "trapezoid") -> np.ndarray:
    """
    int_t^T E ds at every node.

    "left" densities are constant on [t_k, t_{k+1}); "trapezoid" densities are
    node samples.
    """
    E = np.asarray(E, dtype=float)
    if rule == "left":
        slabs = E[:-1] * grid.dt
        tail = np.cumsum(slabs[::-1], axis=0)[::-1]
        return np.concatenate([tail, np.zeros_like(E[:1])], axis=0)
    return cumulative_trapezoid(E[::-1], dx=grid.dt, axis=0, initial=0)[::-1]


def gauge_fix(model, values: np.ndarray, ops: DifferenceOperators):
    """Remove the ran lc* component; returns (projected values, removed magnitude)."""
    if model.Z == 0:
        return values, 0.0
    removed = model.lcstar_apply(range_coefficients(model, values, ops), ops)
    return values - removed, float(np.max(np.abs(removed)))


def trig_filter(values: np.ndarray, max_mode: int):
    """Keep spatial Fourier modes up to max_mode along the cell axis; returns (filtered, relative defect)."""
    spectrum = np.fft.rfft(values, axis=-2)
    spectrum[..., max_mode + 1 :, :] = 0.0
    filtered = np.fft.irfft(spectrum, n=values.shape[-2], axis=-2)
    size = np.linalg.norm(values)
    defect = float(np.linalg.norm(values - filtered) / size) if size > 0 else 0.0
    return filtered, defect


def recover_sharp(
    model,
    grid: SpaceTimeGrid,
    weight,
    E: np.ndarray,
    max_mode: int = None,
    rule: str = "trapezoid",
    order: int = SOLVER_STENCIL_ORDER,
) -> RecoveredSharp:
    """
    v#(t) = -(1 / H(t)) int_t^T E ds, in the gauge lc v# = 0.

    v# is determined only up to ran lc*; that component is removed and its
    size reported. The result is filtered to trig modes up to Nx / 4, and the
    last max(1, Nt / 16) nodes are dropped since H vanishes at T.

    Args:
        model: The ModelSpec.
        grid: The space-time grid.
        weight: WeightProfile on [0, grid.T].
        E: Dual density, shape (Nt + 1, Nx, n).
        max_mode: Highest spatial mode kept; Nx // 4 by default.
        rule: Time rule of E.
        order: Stencil order of lc.

    Returns:
        The RecoveredSharp.

    Raises:
        StructuralError: If E does not match the grid.
    """
    E = np.asarray(E, dtype=float)
    if E.shape != (grid.Nt + 1, grid.Nx, model.n):
        raise StructuralError(f"E has shape {E.shape}, expected {(grid.Nt + 1, grid.Nx, model.n)}")
    cut = max(1, grid.Nt // 16)
    keep = grid.Nt + 1 - cut
    H = weight.H_samples(grid)[:keep]
    values = -tail_integral(grid, E, rule)[:keep] / H[:, None, None]
    ops = DifferenceOperators.for_grid(grid, order)
    values, gauge = gauge_fix(model, values, ops)
    values, defect = trig_filter(values, grid.Nx // 4 if max_mode is None else max_mode)
    logger.info("recovered v# on %d of %d nodes (gauge %.3e, defect %.3e)", keep, grid.Nt + 1, gauge, defect)
    return RecoveredSharp(grid.t[:keep], values, gauge, defect, cut)
