import numpy as np
import pytest
from numpy.testing import assert_allclose

from dualflow.errors import StructuralError
from dualflow.grid import (
    DifferenceOperators,
    MatrixField,
    SpaceTimeGrid,
    StateField,
    adjointness_check,
    derivative,
    mean,
    second_derivative,
)


def test_grid_geometry():
    grid = SpaceTimeGrid(8, 4, 2.0)
    assert grid.dx == 0.125
    assert grid.dt == 0.5
    assert_allclose(grid.x, (np.arange(8) + 0.5) / 8)
    assert_allclose(grid.t, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert grid.cell_measure == pytest.approx(0.0625)


@pytest.mark.parametrize("Nx, Nt, T", [(0, 4, 1.0), (8, 0, 1.0), (8, 4, 0.0), (8, 4, -1.0), (2.5, 4, 1.0)])
def test_invalid_grid(Nx, Nt, T):
    with pytest.raises(ValueError):
        SpaceTimeGrid(Nx, Nt, T)


@pytest.mark.parametrize("rule", ["trapezoid", "left"])
def test_time_weights_integrate_constants(rule):
    grid = SpaceTimeGrid(8, 5, 1.5)
    weights = grid.time_weights(rule)
    assert weights.shape == (6,)
    assert weights.sum() == pytest.approx(1.5)
    assert grid.quadrature(np.ones((6, 8)), rule) == pytest.approx(1.5)


def test_left_rule_drops_the_final_node():
    grid = SpaceTimeGrid(4, 4, 1.0)
    assert grid.time_weights("left")[-1] == 0.0
    with pytest.raises(ValueError):
        grid.time_weights("midpoint")


def test_quadrature_of_linear_in_time_field_is_exact():
    grid = SpaceTimeGrid(4, 10, 2.0)
    field = np.repeat(grid.t[:, None], 4, axis=1)
    assert grid.quadrature(field) == pytest.approx(2.0)
    assert grid.quadrature(np.ones(4)) == pytest.approx(1.0)
    with pytest.raises(StructuralError):
        grid.quadrature(np.ones((3, 3)))


def test_space_integral_per_node(small_grid):
    field = np.ones((small_grid.Nt + 1, small_grid.Nx, 2))
    assert_allclose(small_grid.space_integral(field), np.ones((small_grid.Nt + 1, 2)))


def test_node_index_restrict_refine():
    grid = SpaceTimeGrid(8, 10, 1.0)
    assert grid.node_index(0.3) == 3
    with pytest.raises(ValueError):
        grid.node_index(0.35)
    sub = grid.restrict(0.4)
    assert (sub.Nx, sub.Nt) == (8, 4)
    assert sub.T == pytest.approx(0.4)
    fine = grid.refine()
    assert (fine.Nx, fine.Nt, fine.T) == (16, 20, 1.0)


@pytest.mark.parametrize("order", [2, 4])
@pytest.mark.parametrize("build", [derivative, second_derivative])
def test_stencils_have_exact_transposes(build, order):
    assert adjointness_check(build(24, 1 / 24, order)) <= 1e-12


def test_mean_is_self_adjoint():
    assert adjointness_check(mean(10)) <= 1e-12


@pytest.mark.parametrize("order", [2, 4])
def test_derivative_converges_at_its_order(order):
    errors = []
    for n in (32, 64):
        x = (np.arange(n) + 0.5) / n
        op = derivative(n, 1 / n, order)
        errors.append(np.max(np.abs(op.apply(np.sin(2 * np.pi * x)) - 2 * np.pi * np.cos(2 * np.pi * x))))
    assert errors[0] / errors[1] > 0.8 * 2**order


@pytest.mark.parametrize("order", [2, 4])
def test_second_derivative_accuracy(order):
    n = 64
    x = (np.arange(n) + 0.5) / n
    op = second_derivative(n, 1 / n, order)
    exact = -((2 * np.pi) ** 2) * np.cos(2 * np.pi * x)
    tol = 0.1 if order == 2 else 1e-3
    assert np.max(np.abs(op.apply(np.cos(2 * np.pi * x)) - exact)) < tol


def test_stencils_annihilate_constants():
    ops = DifferenceOperators.build(12, 1 / 12, 4)
    ones = np.ones(12)
    assert np.max(np.abs(ops.d(ones))) == 0.0
    assert np.max(np.abs(ops.dd(ones))) == 0.0
    assert np.max(np.abs(ops.d2(ones))) < 1e-9


def test_sparse_matrix_matches_apply(rng):
    op = derivative(16, 1 / 16, 4)
    a = rng.standard_normal(16)
    assert_allclose(op.matrix() @ a, op.apply(a), atol=1e-12)


def test_stencil_acts_on_the_chosen_axis(rng):
    ops = DifferenceOperators.build(8, 1 / 8, 2)
    field = rng.standard_normal((3, 8))
    assert_allclose(ops.first.apply(field.T, axis=0).T, ops.d(field))
    with pytest.raises(ValueError):
        ops.d(np.ones(7))


def test_mean_broadcasts_the_average():
    ops = DifferenceOperators.build(4, 0.25, 2)
    assert_allclose(ops.mean(np.array([1.0, 2.0, 3.0, 6.0])), np.full(4, 3.0))


def test_state_field_is_read_only(small_grid):
    values = np.zeros((small_grid.Nt + 1, small_grid.Nx, 2))
    field = StateField(values, ("q", "rho"))
    field.check_grid(small_grid, 2)
    with pytest.raises(ValueError):
        field.values[0, 0, 0] = 1.0
    values[0, 0, 0] = 5.0
    assert field.values[0, 0, 0] == 0.0
    assert_allclose(field.component("rho"), 0.0)


def test_state_field_shape_checks(small_grid):
    with pytest.raises(StructuralError):
        StateField(np.zeros((3, 4)))
    with pytest.raises(StructuralError):
        StateField(np.zeros((3, 4, 2)), ("v",))
    with pytest.raises(StructuralError):
        StateField(np.zeros((3, 4, 2))).check_grid(small_grid)


def test_matrix_field_requires_symmetry(small_grid):
    M = np.zeros((small_grid.Nt + 1, small_grid.Nx, 2, 2))
    M[..., 0, 1] = 1.0
    with pytest.raises(StructuralError):
        MatrixField(M)
    M[..., 1, 0] = 1.0
    field = MatrixField(M)
    field.check_grid(small_grid, 2)
    assert_allclose(field.trace(), 0.0)
