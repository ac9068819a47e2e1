import numpy as np
import pytest
from numpy.testing import assert_allclose

from dualflow.consistency import (
    CHECKS,
    build_optimal_pair,
    constraint_residual,
    gauge_fix,
    trial_fields,
    recover_sharp,
    stationarity_residual,
    tail_integral,
    trig_filter,
    verify_certificate,
)
from dualflow.dual_solver import DualPair
from dualflow.errors import StructuralError, WeightError
from dualflow.framework import StrongSolutionRecord, WeightProfile, adapt_weight
from dualflow.grid import DifferenceOperators, SpaceTimeGrid
from dualflow.models import get_model


class TestStationaryPair:
    """At rest v# = (0, 1), so B+ = 0 and E+ = (0, -h)."""

    def test_pair(self, barotropic, stationary_record, constant_weight):
        pair = build_optimal_pair(barotropic, stationary_record, constant_weight)
        assert pair.rule == "trapezoid"
        assert_allclose(pair.B, 0.0, atol=1e-14)
        assert_allclose(pair.E[..., 0], 0.0, atol=1e-14)
        assert_allclose(pair.E[..., 1], -1.0, atol=1e-12)

    def test_certificate(self, barotropic, stationary_record, constant_weight):
        pair = build_optimal_pair(barotropic, stationary_record, constant_weight)
        certificate = verify_certificate(barotropic, stationary_record, constant_weight, pair)
        assert set(certificate.checks) == set(CHECKS)
        assert certificate.target == pytest.approx(0.5)
        assert certificate.objective_value == pytest.approx(0.5, abs=1e-10)
        assert certificate.checks["objective"] <= 1e-10
        assert certificate.checks["constraint"] <= 1e-12
        assert certificate.checks["stationarity"] <= 1e-12
        assert certificate.checks["recovery"] <= 1e-12
        assert certificate.checks["positivity"] == pytest.approx(1.0)
        assert certificate.to_dict()["target"] == pytest.approx(0.5)
        assert certificate.E_plus is pair.E

    def test_recovery(self, barotropic, stationary_record, constant_weight):
        pair = build_optimal_pair(barotropic, stationary_record, constant_weight)
        recovered = recover_sharp(barotropic, stationary_record.grid, constant_weight, pair.E)
        assert recovered.truncated == 1
        assert len(recovered.t) == 8
        assert_allclose(recovered.values[..., 0], 0.0, atol=1e-12)
        assert_allclose(recovered.values[..., 1], 1.0, atol=1e-12)
        assert recovered.gauge == 0.0

    def test_pair_on_another_grid_is_rejected(self, barotropic, stationary_record, constant_weight):
        pair = build_optimal_pair(barotropic, stationary_record, constant_weight)
        other = stationary_record.restrict(0.25)
        with pytest.raises(StructuralError):
            verify_certificate(barotropic, other, WeightProfile.constant(0.25), pair)


def test_burgers_pair_is_nearly_stationary(burgers, burgers_record):
    weight = adapt_weight(burgers, burgers_record)
    pair = build_optimal_pair(burgers, burgers_record, weight)
    assert pair.positivity(burgers_record.grid, weight) >= -1e-12
    assert stationarity_residual(burgers, burgers_record, weight, pair) < 1e-3
    assert_allclose(pair.B[-1], 0.0, atol=1e-14)


def test_steep_data_need_a_larger_gamma(burgers):
    grid = SpaceTimeGrid(16, 4, 1.0)
    x = grid.x
    v = np.broadcast_to((5.0 * np.sin(2 * np.pi * x))[None, :, None], (5, 16, 1)).copy()
    record = StrongSolutionRecord.build(burgers, grid, v, order=2)
    with pytest.raises(WeightError) as info:
        build_optimal_pair(burgers, record, WeightProfile.constant(1.0))
    assert info.value.min_eigenvalue < 0
    assert info.value.suggested_gamma > 0


def test_trial_fields_vanish_initially(barotropic):
    grid = SpaceTimeGrid(8, 4, 1.0)
    fields = list(trial_fields(barotropic, grid))
    # 3 time modes x 5 spatial profiles x 3 symmetric units
    assert len(fields) == 45
    for psi, dpsi in fields:
        assert psi.shape == (5, 8, 2, 2)
        assert_allclose(psi[0], 0.0, atol=1e-15)
        assert_allclose(psi, np.swapaxes(psi, -1, -2))


def test_constraint_residual_of_zero_pair(model):
    grid = SpaceTimeGrid(8, 4, 1.0)
    pair = DualPair(np.zeros((5, 8, model.n)), np.zeros((5, 8, model.N, model.N)))
    assert constraint_residual(model, grid, pair) == 0.0


def test_tail_integral_of_constants():
    grid = SpaceTimeGrid(4, 5, 1.0)
    E = np.ones((6, 4, 1))
    expected = (1.0 - grid.t)[:, None, None] * np.ones((1, 4, 1))
    assert_allclose(tail_integral(grid, E), expected, atol=1e-14)
    assert_allclose(tail_integral(grid, E, rule="left"), expected, atol=1e-14)


def test_left_tail_ignores_the_final_sample():
    grid = SpaceTimeGrid(2, 2, 1.0)
    E = np.zeros((3, 2, 1))
    E[-1] = 100.0
    assert_allclose(tail_integral(grid, E, rule="left"), 0.0)


def test_trig_filter():
    x = (np.arange(16) + 0.5) / 16
    low = np.sin(2 * np.pi * x)
    high = 0.1 * np.cos(2 * np.pi * 5 * x)
    filtered, defect = trig_filter((low + high)[:, None], 2)
    assert_allclose(filtered[:, 0], low, atol=1e-12)
    assert defect == pytest.approx(np.linalg.norm(high) / np.linalg.norm(low + high))
    _, none = trig_filter(np.zeros((8, 1)), 1)
    assert none == 0.0


def test_gauge_fix_removes_the_constraint_range(rng):
    qhd = get_model("qhd")
    ops = DifferenceOperators.build(16, 1 / 16, 2)
    eta = rng.standard_normal((16, 1))
    values, removed = gauge_fix(qhd, qhd.lcstar_apply(eta, ops), ops)
    assert_allclose(values, 0.0, atol=1e-8)
    assert removed > 0


def test_gauge_fix_is_trivial_without_constraints(barotropic, rng):
    ops = DifferenceOperators.build(8, 1 / 8, 2)
    values = rng.standard_normal((8, 2))
    fixed, removed = gauge_fix(barotropic, values, ops)
    assert fixed is values
    assert removed == 0.0


def test_recover_sharp_rejects_wrong_shapes(barotropic, constant_weight, small_grid):
    with pytest.raises(StructuralError):
        recover_sharp(barotropic, small_grid, constant_weight, np.zeros((3, 16, 2)))
