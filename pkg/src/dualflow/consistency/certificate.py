"""The optimal dual pair built from a strong solution, and its certificates."""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from dualflow.config import PSD_TOLERANCE, SOLVER_STENCIL_ORDER
from dualflow.consistency.recovery import gauge_fix, recover_sharp
from dualflow.dual_solver.functional import dual_objective
from dualflow.dual_solver.pdhg import DualPair
from dualflow.errors import WeightError
from dualflow.framework.numerics import min_eigenvalue
from dualflow.framework.weights import adapted_gamma
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)

CHECKS = ("constraint", "positivity", "stationarity", "objective", "recovery")


@dataclass(frozen=True)
class OptimalPairCertificate:
    """
    The pair (E+, B+) and its named residuals.

    Attributes:
        pair: The DualPair (node samples, trapezoid rule).
        checks: Residuals keyed by CHECKS.
        objective_value: -<v0, E+> + K(E+, B+).
        target: H(0) K0.
    """

    pair: DualPair
    checks: dict = field(default_factory=dict)
    objective_value: float = 0.0
    target: float = 0.0

    @property
    def E_plus(self) -> np.ndarray:
        return self.pair.E

    @property
    def B_plus(self) -> np.ndarray:
        return self.pair.B

    def to_dict(self) -> dict:
        data = {name: float(self.checks[name]) for name in CHECKS if name in self.checks}
        data["objective_value"] = float(self.objective_value)
        data["target"] = float(self.target)
        return data


def build_optimal_pair(model, record, weight, order: int = None) -> DualPair:
    """
    B+ = H L*(v#) and E+ = dt(H v#) - H lc* pi on the record's nodes.

    The time derivative uses centered differences with second-order one-sided
    closures at both ends; B+(T) = 0 since H(T) = 0.

    Args:
        model: The ModelSpec of the record.
        record: StrongSolutionRecord.
        weight: WeightProfile on the record's interval.
        order: Stencil order; defaults to the record's.

    Returns:
        The DualPair (trapezoid rule).

    Raises:
        WeightError: If h I + 2B+ has a negative eigenvalue beyond tolerance.
    """
    grid = record.grid
    ops = DifferenceOperators.for_grid(grid, record.order if order is None else order)
    H = weight.H_samples(grid)
    h = weight.h_samples(grid)
    vs = record.vsharp(model)
    S = model.Lstar_apply(vs, ops)
    B = H[:, None, None, None] * S
    Hvs = H[:, None, None] * vs
    if grid.Nt >= 2:
        E = np.gradient(Hvs, grid.dt, axis=0, edge_order=2)
    else:
        E = np.broadcast_to((Hvs[1] - Hvs[0]) / grid.dt, Hvs.shape).copy()
    if record.pi is not None:
        E = E - H[:, None, None] * model.lcstar_apply(record.pi, ops)
    positivity = min_eigenvalue(h[:, None, None, None] * np.eye(model.N) + 2.0 * B)
    worst = float(positivity.min())
    if worst < -PSD_TOLERANCE * max(1.0, float(np.max(h))):
        lam = float(min_eigenvalue(S).min())
        raise WeightError(
            f"h I + 2B+ has eigenvalue {worst:.3e}; increase gamma to at least {adapted_gamma(lam):.6g}",
            min_eigenvalue=worst,
            suggested_gamma=adapted_gamma(lam),
        )
    return DualPair(E, B, rule="trapezoid")


def trial_fields(model, grid: SpaceTimeGrid, time_modes: int = 3, space_modes: int = None):
    """
    Matrix test fields vanishing at t = 0, with their time derivatives.

    Each field is sin((j + 1/2) pi t / T) times a spatial trig mode times a
    symmetric unit matrix; lc L Psi = 0 holds for all of them.

    Yields:
        Tuples (Psi, dPsi/dt) of shape (Nt + 1, Nx, N, N).
    """
    t = grid.t[:, None]
    x = grid.x[None, :]
    space_modes = min(4, max(1, grid.Nx // 4)) if space_modes is None else space_modes
    spatial = [np.ones_like(x)]
    for k in range(1, space_modes + 1):
        spatial += [np.cos(2 * np.pi * k * x), np.sin(2 * np.pi * k * x)]
    units = []
    for i, j in itertools.combinations_with_replacement(range(model.N), 2):
        unit = np.zeros((model.N, model.N))
        unit[i, j] = unit[j, i] = 1.0
        units.append(unit)
    for m in range(time_modes):
        freq = (m + 0.5) * np.pi / grid.T
        for profile in spatial:
            base = np.sin(freq * t) * profile
            dbase = freq * np.cos(freq * t) * profile
            for unit in units:
                yield base[..., None, None] * unit, dbase[..., None, None] * unit


def constraint_residual(model, grid: SpaceTimeGrid, pair: DualPair, order: int = None, time_modes: int = 3) -> float:
    """
    max over test fields of |<dt Psi, B> + <L Psi, E>| / |Psi|.

    Both pairings vanish together for pairs generated by multipliers a with
    a(T) = 0; the test fields vanish at t = 0.
    """
    pair.check_grid(model, grid)
    ops = DifferenceOperators.for_grid(grid, SOLVER_STENCIL_ORDER if order is None else order)
    weights = grid.time_weights(pair.rule) * grid.dx
    worst = 0.0
    for psi, dpsi in trial_fields(model, grid, time_modes):
        lhs = np.einsum("k,kiab,kiab->", weights, dpsi, pair.B) + np.einsum(
            "k,kil,kil->", weights, model.L_apply(psi, ops), pair.E
        )
        size = np.sqrt(np.einsum("k,kiab,kiab->", weights, psi, psi))
        worst = max(worst, abs(lhs) / size)
    return float(worst)


def stationarity_residual(model, record, weight, pair: DualPair) -> float:
    """max over l and cells of |1/2 (h I + 2B+) : dF_l(v) + E+_l|."""
    h = weight.h_samples(record.grid)
    S = 0.5 * h[:, None, None, None] * np.eye(model.N) + pair.B
    return float(np.max(np.abs(np.einsum("kiab,kilab->kil", S, model.dF(record.v.values)) + pair.E)))


def verify_certificate(model, record, weight, pair: DualPair, order: int = None) -> OptimalPairCertificate:
    """
    Evaluate every certificate of (E+, B+) against a strong solution.

    Args:
        model: The ModelSpec.
        record: StrongSolutionRecord the pair was built from.
        weight: WeightProfile on the record's interval.
        pair: DualPair on the record's grid.
        order: Stencil order; defaults to the record's.

    Returns:
        The OptimalPairCertificate.

    Raises:
        StructuralError: If the pair does not match the record's grid.
    """
    grid = record.grid
    pair.check_grid(model, grid)
    order = record.order if order is None else order
    v0 = record.v.values[0]
    h = weight.h_samples(grid)
    positivity = float(min_eigenvalue(h[:, None, None, None] * np.eye(model.N) + 2.0 * pair.B).min())
    objective = dual_objective(model, grid, weight, v0, pair.E, pair.B, pair.rule)
    K0 = record.entropy(model).K0
    target = weight.H0 * K0

    recovered = recover_sharp(model, grid, weight, pair.E, rule=pair.rule, order=order)
    ops = DifferenceOperators.for_grid(grid, order)
    exact, _ = gauge_fix(model, record.vsharp(model)[: len(recovered.t)], ops)
    recovery = float(np.sqrt(np.sum((recovered.values - exact) ** 2) * grid.dx * grid.dt))

    checks = {
        "constraint": constraint_residual(model, grid, pair, order),
        "positivity": positivity,
        "stationarity": stationarity_residual(model, record, weight, pair),
        "objective": abs(objective.value - target),
        "recovery": recovery,
    }
    if not all(np.isfinite(value) for value in checks.values()):
        logger.warning("certificate for %s has non-finite residuals: %s", model.name, checks)
    logger.info("certificate %s/%s: %s", model.name, record.scenario, checks)
    return OptimalPairCertificate(pair, checks, objective.value, target)
