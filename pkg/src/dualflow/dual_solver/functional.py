"""The dual functional: cellwise inner minimization over the epigraph."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from dualflow.config import PSD_TOLERANCE
from dualflow.errors import StructuralError
from dualflow.framework.numerics import min_eigenvalue
from dualflow.grid.spacetime import SpaceTimeGrid

logger = logging.getLogger(__name__)

# Stand-in for -inf while maximizing along a ray.
_PENALTY = -1e300


@dataclass(frozen=True)
class DualValue:
    """
    Result of evaluating the dual functional.

    Attributes:
        value: K(E, B), or -inf.
        cell: (node, cell) of the first offending cell when value is -inf.
        min_eigenvalue: Smallest eigenvalue of h I + 2B over weighted nodes.
    """

    value: float
    cell: tuple = None
    min_eigenvalue: float = 0.0

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.value))


def _shapes(model, grid, E, B):
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    if E.shape != (grid.Nt + 1, grid.Nx, model.n):
        raise StructuralError(f"E has shape {E.shape}, expected {(grid.Nt + 1, grid.Nx, model.n)}")
    if B.shape != (grid.Nt + 1, grid.Nx, model.N, model.N):
        raise StructuralError(f"B has shape {B.shape}, expected {(grid.Nt + 1, grid.Nx, model.N, model.N)}")
    return E, B


def eval_dual_functional(model, grid: SpaceTimeGrid, weight, E, B, rule: str = "trapezoid") -> DualValue:
    """
    K(E, B) = sum over weighted cells of inf_z z.E + 1/2 F(z):(h I + 2B).

    Taking M = F(z) is optimal when h I + 2B is positive semidefinite, so
    the inner problem is the model's dual_cell_minimum.

    Args:
        model: The ModelSpec.
        grid: The space-time grid.
        weight: WeightProfile on [0, grid.T].
        E: Density of shape (Nt + 1, Nx, n).
        B: Symmetric density of shape (Nt + 1, Nx, N, N).
        rule: Time quadrature rule ("trapezoid" or "left").

    Returns:
        DualValue; -inf with the offending cell when positivity fails or the
        inner infimum is unbounded.

    Raises:
        StructuralError: On shape mismatch.
    """
    E, B = _shapes(model, grid, E, B)
    weights = grid.time_weights(rule)
    h = weight.h_samples(grid)
    nodes = np.flatnonzero(weights > 0)
    S = h[nodes, None, None, None] * np.eye(model.N) + 2.0 * B[nodes]
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    lam = min_eigenvalue(S)
    lam_min = float(lam.min())
    scale = np.maximum(1.0, np.abs(S).max(axis=(-2, -1)))
    bad = lam < -PSD_TOLERANCE * scale
    if np.any(bad):
        k, i = np.argwhere(bad)[0]
        cell = (int(nodes[k]), int(i))
        logger.debug("dual functional: h I + 2B not positive at %s (lambda=%.3e)", cell, lam[k, i])
        return DualValue(-np.inf, cell, lam_min)
    # clear rounding-level negative parts
    S = S + np.maximum(0.0, -lam)[..., None, None] * np.eye(model.N)
    values, _ = model.dual_cell_minimum(E[nodes].reshape(-1, model.n), S.reshape(-1, model.N, model.N))
    values = values.reshape(len(nodes), grid.Nx)
    if not np.all(np.isfinite(values)):
        k, i = np.argwhere(~np.isfinite(values))[0]
        return DualValue(-np.inf, (int(nodes[k]), int(i)), lam_min)
    total = float(weights[nodes] @ values.sum(axis=1) * grid.dx)
    return DualValue(total, None, lam_min)


def pairing(grid: SpaceTimeGrid, v0: np.ndarray, E: np.ndarray, rule: str = "trapezoid") -> float:
    """<v0, E> with v0 extended constantly in time."""
    weights = grid.time_weights(rule)
    return float(np.einsum("k,kil,il->", weights, np.asarray(E, dtype=float), np.asarray(v0, dtype=float)) * grid.dx)


def dual_objective(model, grid, weight, v0, E, B, rule: str = "trapezoid") -> DualValue:
    """J = -<v0, E> + K(E, B)."""
    inner = eval_dual_functional(model, grid, weight, E, B, rule)
    if not inner.finite:
        return inner
    return DualValue(inner.value - pairing(grid, v0, E, rule), None, inner.min_eigenvalue)


def positive_ray_limit(grid, weight, B, rule: str = "trapezoid") -> float:
    """Largest theta in [0, 1] keeping h I + 2 theta B positive semidefinite on weighted nodes."""
    weights = grid.time_weights(rule)
    nodes = np.flatnonzero(weights > 0)
    h = weight.h_samples(grid)[nodes]
    lam = min_eigenvalue(np.asarray(B, dtype=float)[nodes])
    with np.errstate(divide="ignore"):
        limits = np.where(lam < 0, h[:, None] / (-2.0 * lam), np.inf)
    return float(min(1.0, limits.min()))


def cone_residual(grid, weight, B, rule: str = "trapezoid") -> float:
    """max over weighted cells of the negative part of lambda_min(h I + 2B)."""
    weights = grid.time_weights(rule)
    nodes = np.flatnonzero(weights > 0)
    h = weight.h_samples(grid)[nodes]
    lam = min_eigenvalue(h[:, None, None, None] * np.eye(B.shape[-1]) + 2.0 * np.asarray(B, dtype=float)[nodes])
    return float(max(0.0, -lam.min()))


def scaled_dual_bound(model, grid, weight, v0, E, B, rule: str = "trapezoid"):
    """
    Best J(theta E, theta B) over theta in [0, theta_max].

    J is concave along the ray and J(0) = K(0, 0) >= 0, so the result is a
    finite lower bound whenever the multipliers are not positive.

    Returns:
        Tuple (value, theta).
    """
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    theta_max = positive_ray_limit(grid, weight, B, rule)

    def objective(theta):
        result = dual_objective(model, grid, weight, v0, theta * E, theta * B, rule)
        return -result.value if result.finite else -_PENALTY

    candidates = {0.0: -objective(0.0), theta_max: -objective(theta_max)}
    if theta_max > 0:
        found = minimize_scalar(objective, bounds=(0.0, theta_max), method="bounded", options={"xatol": 1e-6 * theta_max})
        candidates[float(found.x)] = -float(found.fun)
    theta, value = max(candidates.items(), key=lambda item: item[1])
    return float(value), float(theta)
