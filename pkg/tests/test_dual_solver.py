import numpy as np
import pytest
from numpy.testing import assert_allclose

from dualflow.dual_solver import (
    DualPair,
    ProjectionStats,
    SolverConfig,
    assemble_constraint_operator,
    brenier_variables,
    cone_residual,
    eval_dual_functional,
    feasible_primal,
    pairing,
    positive_ray_limit,
    project_epigraph,
    scaled_dual_bound,
    solve,
)
from dualflow.errors import ConfigError, PreconditionError, StructuralError
from dualflow.framework import WeightProfile
from dualflow.grid import DifferenceOperators, SpaceTimeGrid
from dualflow.models import get_model

from conftest import smooth_state


def _zeros(model, grid):
    E = np.zeros((grid.Nt + 1, grid.Nx, model.n))
    B = np.zeros((grid.Nt + 1, grid.Nx, model.N, model.N))
    return E, B


@pytest.mark.parametrize("order", [2, 4])
def test_constraint_operator_transpose(model, order):
    grid = SpaceTimeGrid(8, 4, 0.2)
    op = assemble_constraint_operator(model, grid, WeightProfile.constant(0.2), order)
    assert op.adjointness_defect() <= 1e-12
    assert op.norm(iterations=30) > 0


def test_operator_rejects_a_foreign_weight(burgers):
    with pytest.raises(StructuralError):
        assemble_constraint_operator(burgers, SpaceTimeGrid(8, 4, 0.2), WeightProfile.constant(1.0))


def test_constraint_operator_shapes(burgers):
    op = assemble_constraint_operator(burgers, SpaceTimeGrid(8, 4, 0.2))
    with pytest.raises(StructuralError):
        op.apply(np.zeros((5, 8, 1)), np.zeros((4, 8, 1, 1)))


def test_rhs_vanishes_at_the_initial_datum(burgers):
    grid = SpaceTimeGrid(8, 4, 0.2)
    op = assemble_constraint_operator(burgers, grid)
    v0 = smooth_state(burgers, grid.Nx, order=op.ops.order)
    v = np.broadcast_to(v0, op.primal_shapes[0]).copy()
    r_a, r_w = op.apply(v, np.zeros(op.primal_shapes[1]))
    b_a, b_w = op.rhs(v0)
    assert_allclose(r_a, b_a)
    assert_allclose(r_w, b_w)


class TestProjection:
    def test_burgers_cells(self, burgers):
        z0 = np.array([[0.0], [1.0], [2.0]])
        M0 = np.array([[[-1.0]], [[1.0]], [[0.0]]])
        stats = ProjectionStats()
        z, M = project_epigraph(burgers, z0, M0, stats=stats)
        assert z[0, 0] == pytest.approx(0.0, abs=1e-14)
        assert M[0, 0, 0] == pytest.approx(0.0, abs=1e-14)
        assert_allclose(z[1], [1.0])
        assert_allclose(M[1], [[1.0]])
        # stationarity of |z - 2|^2 + z^4 on the parabola
        assert 2 * z[2, 0] ** 3 + z[2, 0] - 2 == pytest.approx(0.0, abs=1e-12)
        assert M[2, 0, 0] == pytest.approx(z[2, 0] ** 2)
        assert stats.calls == 1
        assert stats.cells == 2

    def test_fluid_projection_lands_in_the_epigraph(self, model, rng):
        if model.scalar_quadratic:
            pytest.skip("fluid models only")
        z0 = model.sample_states(rng, 20)
        M0 = model.F(z0) - 0.5 * np.eye(model.N)
        z, M = project_epigraph(model, z0, M0)
        gap = np.linalg.eigvalsh(M - model.F(z))
        assert gap.min() >= -1e-8
        assert np.all(z[:, model.rho_index] >= model.rho_min)

    def test_feasible_cells_are_untouched(self, model, rng):
        z0 = model.sample_states(rng, 10)
        M0 = model.F(z0) + np.eye(model.N)
        z, M = project_epigraph(model, z0, M0)
        assert_allclose(z, z0)
        assert_allclose(M, M0)


class TestDualFunctional:
    def test_burgers_closed_form(self, burgers):
        grid = SpaceTimeGrid(8, 4, 1.0)
        weight = WeightProfile.constant(1.0)
        E, B = _zeros(burgers, grid)
        E[...] = 1.0
        # inf_z z + z^2 / 2 = -1/2 per unit of space-time
        result = eval_dual_functional(burgers, grid, weight, E, B)
        assert result.finite
        assert result.value == pytest.approx(-0.5)
        assert result.min_eigenvalue == pytest.approx(1.0)

    def test_negative_curvature_is_minus_infinity(self, burgers):
        grid = SpaceTimeGrid(8, 4, 1.0)
        weight = WeightProfile.constant(1.0)
        E, B = _zeros(burgers, grid)
        B[2, 5] = -1.0
        result = eval_dual_functional(burgers, grid, weight, E, B)
        assert not result.finite
        assert result.cell == (2, 5)
        assert cone_residual(grid, weight, B) == pytest.approx(1.0)
        assert positive_ray_limit(grid, weight, B) == pytest.approx(0.5)

    def test_left_rule_ignores_the_final_node(self, burgers):
        grid = SpaceTimeGrid(8, 4, 1.0)
        weight = WeightProfile.constant(1.0)
        E, B = _zeros(burgers, grid)
        B[-1] = -5.0
        assert eval_dual_functional(burgers, grid, weight, E, B, rule="left").finite

    def test_shape_mismatch(self, burgers):
        grid = SpaceTimeGrid(8, 4, 1.0)
        with pytest.raises(StructuralError):
            eval_dual_functional(burgers, grid, WeightProfile.constant(1.0), np.zeros((4, 8, 1)), np.zeros((5, 8, 1, 1)))

    def test_pairing_of_constants(self, burgers):
        grid = SpaceTimeGrid(8, 4, 2.0)
        E, _ = _zeros(burgers, grid)
        E[...] = 3.0
        assert pairing(grid, np.ones((8, 1)), E) == pytest.approx(6.0)

    def test_scaled_bound_never_drops_below_zero_multipliers(self, burgers):
        grid = SpaceTimeGrid(8, 4, 1.0)
        weight = WeightProfile.constant(1.0)
        E, B = _zeros(burgers, grid)
        E[...] = 10.0
        B[...] = -2.0
        v0 = np.zeros((8, 1))
        value, theta = scaled_dual_bound(burgers, grid, weight, v0, E, B)
        base, _ = scaled_dual_bound(burgers, grid, weight, v0, 0 * E, 0 * B)
        assert value >= base
        assert 0.0 <= theta <= 0.25 + 1e-12


class TestSolverConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"tau": 0.1},
            {"tau": -1.0, "sigma": 1.0},
            {"max_iterations": 0},
            {"check_every": 0},
            {"gap_rel": 0.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SolverConfig(**kwargs)

    def test_steps(self):
        tau, sigma = SolverConfig().steps(4.0)
        assert tau * sigma * 16.0 < 1.0
        assert SolverConfig(tau=0.1, sigma=0.1).steps(5.0) == (0.1, 0.1)
        with pytest.raises(ConfigError):
            SolverConfig(tau=1.0, sigma=1.0).steps(2.0)


def test_dual_pair_requires_symmetric_B():
    B = np.zeros((3, 4, 2, 2))
    B[..., 0, 1] = 1.0
    with pytest.raises(StructuralError):
        DualPair(np.zeros((3, 4, 2)), B)


def test_solve_at_rest_is_exact(burgers):
    grid = SpaceTimeGrid(8, 4, 0.1)
    weight = WeightProfile.constant(0.1)
    config = SolverConfig(max_iterations=20, check_every=5)
    primal, dual, report = solve(burgers, grid, weight, np.zeros((8, 1)), config)
    assert report.converged
    assert report.iterations == 5
    assert report.primal_value == pytest.approx(0.0, abs=1e-14)
    assert report.dual_value == pytest.approx(0.0, abs=1e-14)
    assert_allclose(primal.v.values, 0.0)
    assert list(report.history.columns) == ["iteration", "primal", "dual", "gap", "feasibility", "cone"]
    assert dual.rule == "left"


def test_solve_brackets_the_relaxed_value(burgers):
    grid = SpaceTimeGrid(8, 4, 0.05)
    weight = WeightProfile.constant(0.05)
    v0 = smooth_state(burgers, grid.Nx, order=2, amplitude=0.1)
    config = SolverConfig(max_iterations=200, check_every=50, order=2)
    primal, dual, report = solve(burgers, grid, weight, v0, config)
    assert report.dual_value <= report.primal_value + 1e-9
    assert report.dual_value >= 0.0
    assert primal.relaxation_residual(burgers) <= 1e-12
    assert primal.dynamics_residual(burgers, grid, order=2) <= 1e-10
    assert_allclose(primal.v.values[0], v0)
    assert dual.positivity(grid, weight) >= -1e-10
    assert report.to_dict()["iterations"] == report.iterations


def test_solve_rejects_a_constraint_violating_datum(burgers):
    grid = SpaceTimeGrid(8, 4, 0.1)
    with pytest.raises(PreconditionError):
        solve(burgers, grid, WeightProfile.constant(0.1), np.ones((8, 1)), SolverConfig(max_iterations=1))


def test_solve_rejects_a_wrong_shape(burgers):
    grid = SpaceTimeGrid(8, 4, 0.1)
    with pytest.raises(StructuralError):
        solve(burgers, grid, WeightProfile.constant(0.1), np.zeros((7, 1)), SolverConfig(max_iterations=1))


def test_brenier_variables(burgers, barotropic):
    grid = SpaceTimeGrid(4, 2, 1.0)
    weight = WeightProfile.constant(1.0)
    E, B = _zeros(burgers, grid)
    E[...] = -1.0
    B[...] = 0.25
    q, rho = brenier_variables(burgers, grid, weight, DualPair(E, B))
    assert_allclose(q, 1.0)
    assert_allclose(rho, 1.5)
    E2, B2 = _zeros(barotropic, grid)
    with pytest.raises(PreconditionError):
        brenier_variables(barotropic, grid, weight, DualPair(E2, B2))


def _thinning_slab(model, grid):
    """Rest datum and one slab whose momentum flux drains mass from x = 1/4."""
    x = grid.x
    v0 = np.stack([np.zeros(grid.Nx), np.ones(grid.Nx)], axis=-1)
    M = np.broadcast_to(model.F(v0), (grid.Nt, grid.Nx, 2, 2)).copy()
    M[..., 0, 1] = M[..., 1, 0] = 1.3 * np.cos(2 * np.pi * x)
    return v0, M


def test_feasible_primal_respects_the_density_floor():
    grid = SpaceTimeGrid(8, 1, 0.1)
    ops = DifferenceOperators.for_grid(grid, 2)
    weight = WeightProfile.constant(0.1)
    floored = get_model("barotropic", rho_min=0.5)
    v0, M = _thinning_slab(floored, grid)
    rho1 = v0[:, 1] + grid.dt * floored.L_apply(M, ops)[0, :, 1]
    assert 0.0 < rho1.min() < 0.5

    pair, value = feasible_primal(floored, grid, ops, weight, v0, M)
    assert pair is None
    assert value == np.inf

    pair, value = feasible_primal(get_model("barotropic"), grid, ops, weight, v0, M)
    assert pair is not None
    assert np.isfinite(value)
    assert_allclose(pair.v.values[1, :, 1], rho1)
