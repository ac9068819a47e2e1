"""Cellwise Frobenius projection onto the epigraph {F(z) <= M}."""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from dualflow.config import NEWTON_MAX_ITERATIONS, NEWTON_TOLERANCE
from dualflow.framework.numerics import min_eigenvalue, psd_part, safeguarded_root

logger = logging.getLogger(__name__)

_ARMIJO = 1e-4
_FD_STEP = 1e-7
_BACKTRACKS = 40
_FALLBACK_ITERATIONS = 2000


@dataclass
class ProjectionStats:
    """Counters accumulated over calls to project_epigraph."""

    calls: int = 0
    cells: int = 0
    fallbacks: int = 0


def _feasible(model, z, M, tol):
    ok = np.all(np.isfinite(z), axis=-1)
    if model.rho_index is not None:
        ok &= z[:, model.rho_index] >= model.rho_min
    idx = np.flatnonzero(ok)
    gap = min_eigenvalue(M[idx] - model.F(z[idx]))
    ok[idx] = gap >= -tol * np.maximum(1.0, np.abs(M[idx]).max(axis=(-2, -1)))
    return ok


def _burgers_boundary(z0, m0):
    """Nearest point of the parabola m = z^2 to (z0, m0) from outside."""
    r = np.abs(z0)

    def cubic(z):
        return 2 * z**3 + (1 - 2 * m0) * z - r

    def slope(z):
        return 6 * z**2 + 1 - 2 * m0

    z, _ = safeguarded_root(cubic, slope, np.zeros_like(r), r, tol=1e-15)
    return np.sign(z0) * z


class _Objective:
    """phi(z) = |z - z0|^2 / 2 + |[F(z) - M0]_+|^2 / 2 over a batch of cells."""

    def __init__(self, model, z0, M0):
        self.model = model
        self.z0 = z0
        self.M0 = M0

    def value(self, z, idx):
        excess = psd_part(self.model.F(z) - self.M0[idx])
        return 0.5 * np.sum((z - self.z0[idx]) ** 2, axis=-1) + 0.5 * np.sum(excess**2, axis=(-2, -1))

    def gradient(self, z, idx):
        excess = psd_part(self.model.F(z) - self.M0[idx])
        return (z - self.z0[idx]) + np.einsum("cij,clij->cl", excess, self.model.dF(z))

    def hessian(self, z, idx):
        n = z.shape[-1]
        base = self.gradient(z, idx)
        H = np.empty(z.shape + (n,))
        for l in range(n):
            step = np.zeros(n)
            step[l] = _FD_STEP
            H[..., l] = (self.gradient(z + step, idx) - base) / _FD_STEP
        return 0.5 * (H + np.swapaxes(H, -1, -2))


def _clip(model, z):
    if model.rho_index is not None:
        z[:, model.rho_index] = np.maximum(z[:, model.rho_index], model.rho_min)
    return z


def _projected_gradient(model, z, g):
    if model.rho_index is not None:
        at_floor = (z[:, model.rho_index] <= model.rho_min) & (g[:, model.rho_index] > 0)
        g = g.copy()
        g[at_floor, model.rho_index] = 0.0
    return g


def _line_search(objective, model, z, direction, slope, phi, idx):
    step = np.ones(len(z))
    accepted = np.zeros(len(z), dtype=bool)
    z_new = z.copy()
    for _ in range(_BACKTRACKS):
        trial = _clip(model, z + step[:, None] * direction)
        ok = ~accepted & (objective.value(trial, idx) <= phi + _ARMIJO * step * slope)
        z_new[ok] = trial[ok]
        accepted |= ok
        if np.all(accepted):
            break
        step = np.where(accepted, step, 0.5 * step)
    return z_new, accepted


def _newton(objective, model, z, idx, tol, max_iterations):
    """Damped Newton with Armijo backtracking; returns (z, converged mask)."""
    converged = np.zeros(len(z), dtype=bool)
    for _ in range(max_iterations):
        act = np.flatnonzero(~converged)
        if act.size == 0:
            break
        za, ia = z[act], idx[act]
        g = _projected_gradient(model, za, objective.gradient(za, ia))
        done = np.linalg.norm(g, axis=-1) <= tol * (1.0 + np.linalg.norm(za, axis=-1))
        converged[act[done]] = True
        act, za, ia, g = act[~done], za[~done], ia[~done], g[~done]
        if act.size == 0:
            break
        # forward differences on the analytic gradient
        H = objective.hessian(za, ia)
        shift = np.maximum(0.0, -np.linalg.eigvalsh(H)[:, 0]) + 1e-8
        H = H + shift[:, None, None] * np.eye(H.shape[-1])
        direction = -np.linalg.solve(H, g[..., None])[..., 0]
        slope = np.einsum("ci,ci->c", g, direction)
        uphill = slope >= 0
        direction[uphill] = -g[uphill]
        slope = np.einsum("ci,ci->c", g, direction)
        phi = objective.value(za, ia)
        z_new, accepted = _line_search(objective, model, za, direction, slope, phi, ia)
        small = np.linalg.norm(z_new - za, axis=-1) <= tol * (1.0 + np.linalg.norm(za, axis=-1))
        converged[act[accepted & small]] = True
        z[act] = z_new
    return z, converged


def _gradient_descent(objective, model, z, idx, tol, max_iterations):
    converged = np.zeros(len(z), dtype=bool)
    for _ in range(max_iterations):
        act = np.flatnonzero(~converged)
        if act.size == 0:
            break
        za, ia = z[act], idx[act]
        g = _projected_gradient(model, za, objective.gradient(za, ia))
        done = np.linalg.norm(g, axis=-1) <= tol * (1.0 + np.linalg.norm(za, axis=-1))
        converged[act[done]] = True
        keep = ~done
        if not np.any(keep):
            break
        za, ia, g = za[keep], ia[keep], g[keep]
        phi = objective.value(za, ia)
        z[act[keep]], _ = _line_search(objective, model, za, -g, -np.sum(g**2, axis=-1), phi, ia)
    return z, converged


def project_epigraph(model, z0: np.ndarray, M0: np.ndarray, tol: float = NEWTON_TOLERANCE, stats: ProjectionStats = None):
    """
    Project cells (z0, M0) onto {(z, M) : F(z) <= M, rho >= rho_min}.

    For fixed z the nearest admissible M is F(z) + [M0 - F(z)]_+, which
    leaves phi(z) = |z - z0|^2 / 2 + |[F(z) - M0]_+|^2 / 2 to minimize.
    Burgers cells solve the cubic optimality condition directly; other
    models run damped Newton, falling back to gradient backtracking after
    NEWTON_MAX_ITERATIONS.

    Args:
        model: The ModelSpec.
        z0: States, shape (cells, n).
        M0: Symmetric matrices, shape (cells, N, N).
        tol: Stationarity tolerance in the cell norm.
        stats: Optional counters updated in place.

    Returns:
        Tuple (z, M) of the projected cells; feasible cells are returned unchanged.
    """
    z0 = np.asarray(z0, dtype=float)
    M0 = 0.5 * (np.asarray(M0, dtype=float) + np.swapaxes(np.asarray(M0, dtype=float), -1, -2))
    z = z0.copy()
    M = M0.copy()
    outside = np.flatnonzero(~_feasible(model, z0, M0, 1e-14))
    if stats is not None:
        stats.calls += 1
        stats.cells += outside.size
    if outside.size == 0:
        return z, M
    if model.scalar_quadratic:
        zs = _burgers_boundary(z0[outside, 0], M0[outside, 0, 0])
        z[outside, 0] = zs
    else:
        objective = _Objective(model, z0, M0)
        start = _clip(model, z0[outside].copy())
        zo, ok = _newton(objective, model, start, outside, tol, NEWTON_MAX_ITERATIONS)
        if not np.all(ok):
            bad = np.flatnonzero(~ok)
            warnings.warn(f"epigraph projection: Newton stopped on {bad.size} cells, using gradient backtracking")
            if stats is not None:
                stats.fallbacks += bad.size
            zo[bad], ok_fb = _gradient_descent(objective, model, zo[bad], outside[bad], tol, _FALLBACK_ITERATIONS)
            if not np.all(ok_fb):
                logger.warning("%s: %d projection cells stopped at the fallback cap", model.name, int(np.sum(~ok_fb)))
        z[outside] = zo
    Fz = model.F(z[outside])
    M[outside] = Fz + psd_part(M0[outside] - Fz)
    return z, M
