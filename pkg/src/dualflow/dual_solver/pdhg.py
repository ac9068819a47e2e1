"""First-order primal-dual (Chambolle-Pock) solver for the relaxed primal problem and its dual."""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from dualflow.config import (
    CHECK_EVERY,
    FEAS_ABS_TOLERANCE,
    GAP_REL_TOLERANCE,
    MAX_ITERATIONS,
    POWER_ITERATIONS,
    SOLVER_STENCIL_ORDER,
    STEP_SAFETY,
)
from dualflow.dual_solver.functional import cone_residual, scaled_dual_bound
from dualflow.dual_solver.operator import assemble_constraint_operator
from dualflow.dual_solver.projection import ProjectionStats, project_epigraph
from dualflow.errors import ConfigError, PreconditionError, StructuralError
from dualflow.framework.entropy import EntropyTimeline, matrix_entropy
from dualflow.framework.numerics import min_eigenvalue
from dualflow.framework.residuals import constraint_violation
from dualflow.grid.fields import MatrixField, StateField, symmetrize
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """
    Settings of the primal-dual iteration.

    Attributes:
        tau: Primal step; STEP_SAFETY / |A| when None.
        sigma: Dual step; STEP_SAFETY / |A| when None.
        max_iterations: Iteration cap.
        gap_rel: Relative duality gap tolerance.
        feas_abs: Absolute tolerance on the constraint residual.
        power_iterations: Steps of the operator norm estimate.
        check_every: Iterations between bound evaluations.
        order: Stencil order of the discretization.
        progress: Show a progress bar.
    """

    tau: float = None
    sigma: float = None
    max_iterations: int = MAX_ITERATIONS
    gap_rel: float = GAP_REL_TOLERANCE
    feas_abs: float = FEAS_ABS_TOLERANCE
    power_iterations: int = POWER_ITERATIONS
    check_every: int = CHECK_EVERY
    order: int = SOLVER_STENCIL_ORDER
    progress: bool = False

    def __post_init__(self):
        for name in ("tau", "sigma"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}", section="solver", key=name)
        if (self.tau is None) != (self.sigma is None):
            raise ConfigError("tau and sigma must be given together", section="solver", key="tau")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}", section="solver", key="max_iterations")
        if self.check_every < 1:
            raise ConfigError(f"check_every must be >= 1, got {self.check_every}", section="solver", key="check_every")
        if not self.gap_rel > 0 or not self.feas_abs > 0:
            raise ConfigError("tolerances must be positive", section="solver", key="gap_rel")

    def steps(self, norm: float):
        """
        Step sizes for an operator of the given norm.

        Raises:
            ConfigError: If explicit steps violate tau sigma |A|^2 <= 1.
        """
        if self.tau is None:
            return STEP_SAFETY / norm, STEP_SAFETY / norm
        if self.tau * self.sigma * norm**2 > 1.0:
            raise ConfigError(
                f"tau sigma |A|^2 = {self.tau * self.sigma * norm ** 2:.4g} exceeds 1", section="solver", key="tau"
            )
        return self.tau, self.sigma

    def describe(self) -> dict:
        return {
            "tau": self.tau,
            "sigma": self.sigma,
            "max_iterations": self.max_iterations,
            "gap_rel": self.gap_rel,
            "feas_abs": self.feas_abs,
            "power_iterations": self.power_iterations,
            "check_every": self.check_every,
            "order": self.order,
        }


@dataclass(frozen=True)
class PrimalPair:
    """A relaxed subsolution (v, M) on the time nodes."""

    v: StateField
    M: MatrixField

    def dynamics_residual(self, model, grid: SpaceTimeGrid, order: int = SOLVER_STENCIL_ORDER) -> float:
        """max over slabs of |(v_{k+1} - v_k) / dt - L M_k| and |lc v|."""
        ops = DifferenceOperators.for_grid(grid, order)
        v, M = self.v.values, self.M.values
        jump = (v[1:] - v[:-1]) / grid.dt - model.L_apply(M[:-1], ops)
        return float(max(np.max(np.abs(jump)), constraint_violation(model, v, ops)))

    def relaxation_residual(self, model) -> float:
        """max over cells of the positive part of lambda_max(F(v) - M)."""
        return float(max(0.0, np.max(-min_eigenvalue(self.M.values - model.F(self.v.values)))))

    def weak_form_residual(self, grid: SpaceTimeGrid, v0: np.ndarray, E: np.ndarray, B: np.ndarray, rule: str = "left") -> float:
        """|<v - v0, E> + <M, B>|, which vanishes for solutions of the discrete constraints."""
        weights = grid.time_weights(rule)
        dv = self.v.values - np.asarray(v0, dtype=float)
        total = np.einsum("k,kil,kil->", weights, dv, E) + np.einsum("k,kiab,kiab->", weights, self.M.values, B)
        return float(abs(total) * grid.dx)

    def entropy(self, grid: SpaceTimeGrid) -> EntropyTimeline:
        return matrix_entropy(grid, self.M)


@dataclass(frozen=True)
class DualPair:
    """
    Dual densities (E, B) on the time nodes.

    Attributes:
        E: Shape (Nt + 1, Nx, n).
        B: Symmetric, shape (Nt + 1, Nx, N, N).
        rule: Time rule the densities are integrated with ("left" for
            solver output, "trapezoid" for node-sampled pairs).
    """

    E: np.ndarray
    B: np.ndarray
    rule: str = "trapezoid"

    def __post_init__(self):
        E = np.array(self.E, dtype=float)
        B = np.array(self.B, dtype=float)
        if E.ndim != 3 or B.ndim != 4 or E.shape[:2] != B.shape[:2]:
            raise StructuralError(f"E {E.shape} and B {B.shape} do not form a dual pair")
        asym = np.max(np.abs(B - np.swapaxes(B, -1, -2))) if B.size else 0.0
        if asym > 1e-10 * max(1.0, float(np.max(np.abs(B)))):
            raise StructuralError(f"B is not symmetric (defect {asym:.3e})")
        E.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "B", symmetrize(B))

    def check_grid(self, model, grid: SpaceTimeGrid) -> None:
        if self.E.shape != (grid.Nt + 1, grid.Nx, model.n) or self.B.shape[-1] != model.N:
            raise StructuralError(f"dual pair {self.E.shape} does not match the grid and {model.name}")

    def positivity(self, grid: SpaceTimeGrid, weight) -> float:
        """Smallest eigenvalue of h I + 2B over the nodes carrying weight."""
        nodes = np.flatnonzero(grid.time_weights(self.rule) > 0)
        h = weight.h_samples(grid)[nodes]
        S = h[:, None, None, None] * np.eye(self.B.shape[-1]) + 2.0 * self.B[nodes]
        return float(min_eigenvalue(S).min())

    def scaled(self, factor: float) -> "DualPair":
        return DualPair(factor * self.E, factor * self.B, self.rule)


@dataclass
class DualReport:
    """
    Outcome of a solve.

    Attributes:
        primal_value: Feasible primal bound I~.
        dual_value: Dual bound J~.
        gap: I~ - J~.
        constraint_residual: Max constraint violation of the last iterate.
        cone_residual: Positivity defect of the raw multipliers.
        iterations: Iterations performed.
        converged: Whether both tolerances were met.
        entropy: Subsolution entropy timeline of the primal pair.
        history: One row per check (iteration, primal, dual, gap, feasibility, cone).
        theta: Ray scaling applied to the multipliers of the best dual bound.
        projection_fallbacks: Cells handed to the projection fallback.
        tau, sigma, operator_norm: Step data.
    """

    primal_value: float
    dual_value: float
    gap: float
    constraint_residual: float
    cone_residual: float
    iterations: int
    converged: bool
    entropy: EntropyTimeline = None
    history: pd.DataFrame = field(default_factory=pd.DataFrame)
    theta: float = 1.0
    projection_fallbacks: int = 0
    tau: float = 0.0
    sigma: float = 0.0
    operator_norm: float = 0.0

    def to_dict(self) -> dict:
        return {
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "constraint_residual": self.constraint_residual,
            "cone_residual": self.cone_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "theta": self.theta,
            "projection_fallbacks": self.projection_fallbacks,
            "tau": self.tau,
            "sigma": self.sigma,
            "operator_norm": self.operator_norm,
        }


def _check_initial(model, grid, v0, ops):
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (grid.Nx, model.n):
        raise StructuralError(f"v0 has shape {v0.shape}, expected {(grid.Nx, model.n)}")
    model.check_domain(v0, interior=True)
    scale = max(1.0, float(np.max(np.abs(v0))))
    violation = constraint_violation(model, v0, ops)
    if violation > 1e-8 * scale:
        raise PreconditionError(f"{model.name}: initial datum violates the linear constraint by {violation:.3e}")
    defect = float(np.max(np.abs(model.L_apply(model.identity_field(grid.Nx), ops))))
    if defect > 1e-12:
        raise PreconditionError(f"{model.name}: L(I) = 0 fails by {defect:.3e}")
    return v0


def feasible_primal(model, grid: SpaceTimeGrid, ops: DifferenceOperators, weight, v0, M):
    """
    Turn slab matrices M_k into a feasible pair and its objective.

    v follows v_{k+1} = v_k + dt L M_k from v0; each M_k is shifted by
    c_k I with c_k the largest excess of F(v_k) over M_k in the slab. L(I) = 0
    keeps the dynamics intact.

    Returns:
        Tuple (PrimalPair, value); (None, inf) when v drops below the
        density floor rho_min.
    """
    dt = grid.dt
    steps = dt * model.L_apply(M, ops)
    v = np.concatenate([v0[None], v0[None] + np.cumsum(steps, axis=0)], axis=0)
    if not np.all(model.in_interior(v)):
        logger.debug("%s: repaired iterate leaves the interior of dom F", model.name)
        return None, np.inf
    I = np.eye(model.N)
    Mf = np.concatenate([M, M[-1:]], axis=0)
    excess = np.max(-min_eigenvalue(Mf - model.F(v)), axis=1)
    Mf = Mf + np.maximum(excess, 0.0)[:, None, None, None] * I
    h = weight.h_samples(grid)
    weights = grid.time_weights("left")
    value = 0.5 * float(np.sum(weights * h * np.trace(Mf, axis1=-2, axis2=-1).sum(axis=1)) * grid.dx)
    return PrimalPair(StateField(v, model.labels), MatrixField(symmetrize(Mf))), value


def _with_terminal(a):
    return np.concatenate([a, np.zeros_like(a[:1])], axis=0)


def solve(model, grid: SpaceTimeGrid, weight, v0: np.ndarray, config: SolverConfig = None):
    """
    Run the primal-dual iteration for the relaxed problem.

    The primal step projects onto the epigraph cell by cell; the dual step
    ascends on the constraint residual. Bounds are evaluated independently
    every `check_every` iterations: the primal value at a feasible repair of
    the iterate, the dual value along the positive ray of the multipliers.
    The dual step never clips eigenvalues of h I + 2B; positivity enters only
    through the scaling theta (E, B) of the bound, which keeps it a valid
    lower bound at every iterate.

    Args:
        model: The ModelSpec.
        grid: The space-time grid.
        weight: WeightProfile on [0, grid.T].
        v0: Initial datum of shape (Nx, n).
        config: SolverConfig; defaults when None.

    Returns:
        Tuple (PrimalPair, DualPair, DualReport) holding the best bounds seen.

    Raises:
        PreconditionError: If v0 is outside the interior of dom F or violates lc.
        ConfigError: If explicit step sizes are too large.
    """
    config = config or SolverConfig()
    op = assemble_constraint_operator(model, grid, weight, config.order)
    v0 = _check_initial(model, grid, v0, op.ops)
    norm = op.norm(config.power_iterations)
    tau, sigma = config.steps(norm)
    b_a, b_w = op.rhs(v0)
    half_h = 0.5 * weight.h_samples(grid)[:-1, None, None, None] * np.eye(model.N)
    cells = grid.Nt * grid.Nx

    v = np.broadcast_to(v0, op.primal_shapes[0]).copy()
    M = model.F(v)
    a = np.zeros(op.dual_shapes[0])
    w = np.zeros(op.dual_shapes[1])
    v_bar, M_bar = v, M
    stats = ProjectionStats()

    best_primal, best_primal_pair = np.inf, None
    best_dual, best_dual_pair, best_theta = -np.inf, None, 1.0
    history = []
    converged = False
    iterations = 0
    feasibility = cone = np.inf
    logger.info("solve %s on Nx=%d Nt=%d T=%g, |A|=%.4g tau=%.3g", model.name, grid.Nx, grid.Nt, grid.T, norm, tau)

    for it in tqdm(range(config.max_iterations), disable=not config.progress, desc=f"pdhg {model.name}"):
        r_a, r_w = op.apply(v_bar, M_bar)
        a = a + sigma * (r_a - b_a)
        w = w + sigma * (r_w - b_w)
        E, B = op.adjoint(a, w)
        z, Mp = project_epigraph(
            model,
            (v - tau * E).reshape(cells, model.n),
            (M - tau * (B + half_h)).reshape(cells, model.N, model.N),
            stats=stats,
        )
        z = z.reshape(v.shape)
        Mp = Mp.reshape(M.shape)
        v_bar, M_bar = 2 * z - v, 2 * Mp - M
        v, M = z, Mp
        iterations = it + 1
        if iterations % config.check_every and iterations != config.max_iterations:
            continue

        r_a, r_w = op.apply(v, M)
        feasibility = float(max(np.max(np.abs(r_a - b_a)), np.max(np.abs(r_w - b_w), initial=0.0)))
        pair, primal = feasible_primal(model, grid, op.ops, weight, v0, M)
        if primal < best_primal:
            best_primal, best_primal_pair = primal, pair
        E_full, B_full = _with_terminal(E), _with_terminal(B)
        cone = cone_residual(grid, weight, B_full, rule="left")
        dual, theta = scaled_dual_bound(model, grid, weight, v0, E_full, B_full, rule="left")
        if dual > best_dual:
            best_dual, best_theta = dual, theta
            best_dual_pair = DualPair(theta * E_full, theta * B_full, rule="left")
        gap = best_primal - best_dual
        history.append(
            {"iteration": iterations, "primal": best_primal, "dual": best_dual, "gap": gap, "feasibility": feasibility, "cone": cone}
        )
        logger.debug("it %d: primal=%.8g dual=%.8g gap=%.3e feas=%.3e cone=%.3e", iterations, best_primal, best_dual, gap, feasibility, cone)
        if gap <= config.gap_rel * abs(best_primal) + 1e-12 and feasibility <= config.feas_abs:
            converged = True
            break

    if best_primal_pair is None:
        best_primal_pair, best_primal = feasible_primal(model, grid, op.ops, weight, v0, model.F(np.broadcast_to(v0, v.shape)))
    if best_dual_pair is None:
        shape = (grid.Nt + 1,) + op.dual_shapes[0][1:]
        best_dual_pair = DualPair(np.zeros(shape), np.zeros(shape[:2] + (model.N, model.N)), rule="left")
    if not converged:
        logger.warning("%s: no convergence after %d iterations (gap %.3e)", model.name, iterations, best_primal - best_dual)
    report = DualReport(
        primal_value=float(best_primal),
        dual_value=float(best_dual),
        gap=float(best_primal - best_dual),
        constraint_residual=feasibility,
        cone_residual=cone,
        iterations=iterations,
        converged=converged,
        entropy=best_primal_pair.entropy(grid),
        history=pd.DataFrame(history, columns=["iteration", "primal", "dual", "gap", "feasibility", "cone"]),
        theta=best_theta,
        projection_fallbacks=stats.fallbacks,
        tau=tau,
        sigma=sigma,
        operator_norm=norm,
    )
    logger.info(
        "solve %s: %d iterations, I=%.8g J=%.8g gap=%.3e converged=%s",
        model.name, iterations, report.primal_value, report.dual_value, report.gap, converged,
    )
    return best_primal_pair, best_dual_pair, report


def brenier_variables(model, grid: SpaceTimeGrid, weight, pair: DualPair):
    """
    Flux variables (q, rho) = (-E, h + 2B) of a Burgers dual pair.

    Returns:
        Tuple of arrays of shape (Nt + 1, Nx).

    Raises:
        PreconditionError: For models other than Burgers.
    """
    if not model.scalar_quadratic:
        raise PreconditionError(f"Brenier variables are defined for the Burgers model, not {model.name}")
    pair.check_grid(model, grid)
    h = weight.h_samples(grid)
    return -pair.E[..., 0], h[:, None] + 2.0 * pair.B[..., 0, 0]
