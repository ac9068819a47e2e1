"""Smooth strong solutions for verification, and pointwise model checks."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import newton

from dualflow.config import VERIFY_STENCIL_ORDER
from dualflow.errors import HorizonError, PreconditionError
from dualflow.framework.records import StrongSolutionRecord
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators
from dualflow.models.initial_data import TrigSeries

logger = logging.getLogger(__name__)

SCENARIOS = ("burgers_characteristics", "acoustic", "stationary_state")

# Cell-to-cell jumps beyond this fraction of the solution size count as blow-up.
_BLOWUP_JUMP = 0.25


@dataclass(frozen=True)
class Scenario:
    """
    Initial data and horizon of a manufactured strong solution.

    Attributes:
        kind: One of SCENARIOS.
        T1: Horizon.
        v0: Burgers initial datum.
        amplitude: Perturbation size of the acoustic scenario.
        rho_bar: Background density for fluid models.
        q_bar: Background momentum for fluid models.
    """

    kind: str
    T1: float
    v0: TrigSeries = field(default_factory=lambda: TrigSeries.parse("sin:1"))
    amplitude: float = 1e-2
    rho_bar: float = 1.0
    q_bar: float = 0.0

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise PreconditionError(f"unknown scenario {self.kind!r}, expected one of {SCENARIOS}")
        if not self.T1 > 0:
            raise PreconditionError(f"T1 must be positive, got {self.T1}")

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "T1": self.T1,
            "v0": str(self.v0),
            "amplitude": self.amplitude,
            "rho_bar": self.rho_bar,
            "q_bar": self.q_bar,
        }


def burgers_horizon(v0: TrigSeries) -> float:
    """First gradient catastrophe -1 / min v0'; inf for nondecreasing data."""
    slope = v0.min_derivative()
    return float("inf") if slope >= 0 else -1.0 / slope


def burgers_characteristics(v0: TrigSeries, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """
    Solve v = v0(x - v t) node by node with vectorized Newton.

    Args:
        v0: Smooth periodic datum.
        x: Cell centers.
        t: Times below the horizon.

    Returns:
        Array of shape (len(t), len(x)).
    """
    out = np.empty((len(t), len(x)))
    guess = v0(x)
    for k, tk in enumerate(t):
        if tk == 0:
            out[k] = v0(x)
            continue

        def residual(v, tk=tk):
            return v - v0(x - v * tk)

        def slope(v, tk=tk):
            return 1.0 + tk * v0.derivative(x - v * tk)

        out[k] = newton(residual, guess, fprime=slope, tol=1e-14, maxiter=100)
        guess = out[k]
    return out


def rk4_step(rhs, v: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(v)
    k2 = rhs(v + 0.5 * dt * k1)
    k3 = rhs(v + 0.5 * dt * k2)
    k4 = rhs(v + dt * k3)
    return v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def stable_substep(model, v: np.ndarray, dx: float) -> float:
    """Explicit step bound: advective CFL, plus dx^2 for dispersive models."""
    rho = v[..., -1]
    u = np.max(np.abs(v[..., :-1] / rho[..., None]))
    c = np.sqrt(np.max(np.abs(model.pressure.dP(rho))))
    dt = 0.5 * dx / (u + c + 1e-12)
    if model.Z > 0:
        scale = max(1.0, float(np.max(np.abs(model.grad_K(v)[..., :-1]))) * getattr(model, "nu", 1.0))
        dt = min(dt, 0.25 * dx**2 / scale)
    return dt


def evolve(rhs, v0: np.ndarray, grid: SpaceTimeGrid, substep, check=None) -> np.ndarray:
    """
    RK4 from v0 through every node of the grid.

    Args:
        rhs: Right-hand side on slices.
        v0: Initial slice.
        grid: Output nodes.
        substep: Callable giving the admissible substep for a slice.
        check: Optional callable raising HorizonError(t) on blow-up.

    Returns:
        Array with a leading axis of length Nt + 1.
    """
    out = np.empty((grid.Nt + 1,) + v0.shape)
    out[0] = v = v0
    for k in range(grid.Nt):
        steps = max(1, int(np.ceil(grid.dt / substep(v))))
        h = grid.dt / steps
        for _ in range(steps):
            v = rk4_step(rhs, v, h)
        if check is not None:
            check(v, grid.t[k])
        out[k + 1] = v
    return out


def _blowup_check(model):
    def check(v, t_last):
        jump = np.max(np.abs(np.diff(v, axis=0, append=v[:1])))
        bad = not np.all(np.isfinite(v)) or jump > _BLOWUP_JUMP * (1.0 + np.max(np.abs(v)))
        if model.rho_index is not None and not bad:
            bad = np.min(v[..., -1]) < model.rho_min
        if bad:
            raise HorizonError(f"{model.name}: solution lost smoothness after t={t_last:g}", max_horizon=t_last)

    return check


def acoustic_initial(model, scenario: Scenario, x: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
    eps = scenario.amplitude
    rho = scenario.rho_bar + eps * np.cos(2 * np.pi * x)
    q = scenario.q_bar + eps * np.sin(2 * np.pi * x)
    return model.from_primitive(q, rho, ops)


def manufacture_strong_solution(
    model,
    scenario: Scenario,
    Nx: int,
    Nt: int,
    order: int = VERIFY_STENCIL_ORDER,
) -> StrongSolutionRecord:
    """
    Build a StrongSolutionRecord for a scenario on [0, T1].

    Burgers data follow the characteristics exactly; fluid data are stepped
    conservatively with RK4 on dt v = L(F(v)).

    Raises:
        HorizonError: If T1 reaches the smoothness horizon.
        PreconditionError: If the scenario does not apply to the model.
    """
    grid = SpaceTimeGrid(Nx, Nt, scenario.T1)
    ops = DifferenceOperators.for_grid(grid, order)
    x = grid.x
    if scenario.kind == "stationary_state":
        if model.name == "burgers":
            v0 = np.zeros((Nx, 1))
        else:
            v0 = model.from_primitive(np.full(Nx, scenario.q_bar), np.full(Nx, scenario.rho_bar), ops)
        values = np.broadcast_to(v0, (Nt + 1,) + v0.shape).copy()
    elif model.name == "burgers":
        v0 = scenario.v0 if scenario.kind == "burgers_characteristics" else TrigSeries.parse("sin:1").scaled(scenario.amplitude)
        if abs(v0.mean()) > 1e-14:
            raise PreconditionError("Burgers initial data must have zero mean")
        horizon = burgers_horizon(v0)
        if scenario.T1 >= horizon:
            raise HorizonError(f"T1={scenario.T1} reaches the gradient catastrophe at t={horizon:.6g}", max_horizon=horizon)
        values = burgers_characteristics(v0, x, grid.t)[..., None]
    elif scenario.kind == "acoustic":
        v0 = acoustic_initial(model, scenario, x, ops)
        model.check_domain(v0, interior=True)

        def rhs(v):
            return model.L_apply(model.F(v), ops)

        values = evolve(
            rhs, v0, grid, lambda v: stable_substep(model, v, grid.dx), _blowup_check(model)
        )
    else:
        raise PreconditionError(f"scenario {scenario.kind!r} applies to the Burgers model only")
    logger.info("manufactured %s/%s on Nx=%d Nt=%d T1=%g", model.name, scenario.kind, Nx, Nt, scenario.T1)
    return StrongSolutionRecord.build(model, grid, values, order=order, scenario=scenario.kind, meta=scenario.describe())


def sharp_equivalence_defect(model, scenario: Scenario, Nx: int, Nt: int, order: int = VERIFY_STENCIL_ORDER) -> float:
    """
    Max |v_conservative - unsharp(w_sharp)| at T1 for the acoustic data.

    Raises:
        PreconditionError: If the model has no sharp stepper.
    """
    if not hasattr(model, "sharp_rhs"):
        raise PreconditionError(f"{model.name} has no sharp formulation stepper")
    grid = SpaceTimeGrid(Nx, Nt, scenario.T1)
    ops = DifferenceOperators.for_grid(grid, order)
    v0 = acoustic_initial(model, scenario, grid.x, ops)
    def conservative_rhs(v):
        return model.L_apply(model.F(v), ops)

    def sharp_rhs(w):
        return model.sharp_rhs(w, ops)

    def substep(v):
        return stable_substep(model, v, grid.dx)

    def sharp_substep(w):
        return stable_substep(model, model.sharp_inverse(w), grid.dx)

    conservative = evolve(conservative_rhs, v0, grid, substep)
    w = evolve(sharp_rhs, model.grad_K(v0), grid, sharp_substep)
    return float(np.max(np.abs(conservative[-1] - model.sharp_inverse(w[-1]))))


def lowner_convexity_defect(model, trials: int = 1000, seed: int = 0) -> float:
    """
    Most negative eigenvalue of (F(v1) + F(v2)) / 2 - F((v1 + v2) / 2) over random pairs.

    Eigenvalues are relative to max(1, |F|) of the pair average.
    """
    rng = np.random.default_rng(seed)
    v1 = model.sample_states(rng, trials)
    v2 = model.sample_states(rng, trials)
    average = 0.5 * (model.F(v1) + model.F(v2))
    gap = average - model.F(0.5 * (v1 + v2))
    lam = np.linalg.eigvalsh(0.5 * (gap + np.swapaxes(gap, -1, -2)))[..., 0]
    scale = np.maximum(1.0, np.linalg.norm(average, axis=(-2, -1)))
    worst = float(np.min(lam / scale))
    logger.debug("%s: Lowner check over %d pairs, worst %.3e", model.name, trials, worst)
    return worst
