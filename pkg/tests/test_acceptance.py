"""End-to-end checks on reduced grids; the expensive ones are marked slow."""

import numpy as np
import pytest

from dualflow.burgers_exact import entropy_solution, shock_free_substitute, verify_proposition
from dualflow.consistency import build_optimal_pair, verify_certificate
from dualflow.dual_solver import SolverConfig, solve
from dualflow.framework import WeightProfile, adapt_weight, conservativity_residual
from dualflow.grid import DifferenceOperators, SpaceTimeGrid
from dualflow.models import Scenario, TrigSeries, get_model, manufacture_strong_solution

from conftest import smooth_state

SINE = TrigSeries.parse("sin:1")


def _sine_certificate(N):
    burgers = get_model("burgers")
    record = manufacture_strong_solution(burgers, Scenario("burgers_characteristics", 0.1, SINE), N, N)
    weight = adapt_weight(burgers, record)
    pair = build_optimal_pair(burgers, record, weight)
    return verify_certificate(burgers, record, weight, pair)


@pytest.fixture(scope="module")
def sine_certificates():
    return {N: _sine_certificate(N) for N in (128, 256)}


@pytest.mark.slow
class TestSmoothBurgersPair:
    def test_objective_matches_the_weighted_entropy(self, sine_certificates):
        fine = sine_certificates[256]
        assert fine.checks["objective"] <= 1e-3 * fine.target
        assert sine_certificates[128].checks["objective"] >= 1.7 * fine.checks["objective"]

    def test_recovered_sharp_variable_converges(self, sine_certificates):
        fine = sine_certificates[256].checks["recovery"]
        assert fine <= 2e-3
        assert fine < sine_certificates[128].checks["recovery"]


@pytest.mark.slow
def test_barotropic_rest_state_closes_the_gap():
    model = get_model("barotropic")
    grid = SpaceTimeGrid(8, 4, 0.5)
    v0 = np.stack([np.zeros(8), np.ones(8)], axis=-1)
    config = SolverConfig(max_iterations=20000, check_every=50)
    _, _, report = solve(model, grid, WeightProfile.constant(0.5), v0, config)
    assert report.converged
    assert report.primal_value == pytest.approx(0.5, abs=1e-3)
    assert report.gap <= 1e-3 * report.primal_value


@pytest.mark.slow
def test_burgers_sine_gap_closes():
    burgers = get_model("burgers")
    grid = SpaceTimeGrid(64, 64, 0.1)
    v0 = SINE(grid.x)[:, None]
    config = SolverConfig(max_iterations=50000, check_every=100, gap_rel=0.04)
    _, _, report = solve(burgers, grid, WeightProfile.constant(0.1), v0, config)
    assert report.gap <= 1e-3


@pytest.mark.parametrize("name", ["burgers", "barotropic", "qhd"])
@pytest.mark.parametrize("amplitude", [0.0, 0.05, 0.3])
def test_dual_bound_never_exceeds_the_primal_bound(name, amplitude):
    model = get_model(name)
    grid = SpaceTimeGrid(8, 4, 0.1)
    v0 = smooth_state(model, grid.Nx, order=2, amplitude=amplitude)
    config = SolverConfig(max_iterations=100, check_every=10, order=2)
    _, _, report = solve(model, grid, WeightProfile.constant(0.1), v0, config)
    history = report.history
    assert len(history) >= 1
    assert (history["dual"] <= history["primal"] + 1e-8).all()
    assert (history["dual"] >= 0.0).all()


def _random_field(model, coefficients, Nx):
    """Trig series with the given (k, a, b) rows, sampled on Nx cells."""
    x = np.arange(Nx) / Nx

    def series(rows):
        return sum(a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x) for k, a, b in rows)

    if model.name == "burgers":
        return series(coefficients[0])[:, None]
    ops = DifferenceOperators.build(Nx, 1.0 / Nx, 4)
    return model.from_primitive(0.1 * series(coefficients[1]), 1.0 + 0.1 * series(coefficients[0]), ops)


@pytest.mark.slow
def test_conservativity_converges_at_fourth_order(model, rng):
    orders = []
    for _ in range(20):
        coefficients = [
            [(k, *(rng.uniform(-1.0, 1.0, 2) / k**2)) for k in range(1, 4)] for _ in range(2)
        ]
        coarse = conservativity_residual(model, _random_field(model, coefficients, 128))
        fine = conservativity_residual(model, _random_field(model, coefficients, 256))
        assert fine <= 1e-5
        if coarse > 1e-12:
            orders.append(np.log2(coarse / fine))
    if orders:
        assert np.median(orders) >= 3.5


@pytest.mark.slow
class TestSubstituteRefinement:
    @pytest.mark.parametrize("Nx", [256, 1024, 4096])
    def test_trace_after_the_shock(self, Nx):
        sub = shock_free_substitute(SINE, 0.5)
        x = (np.arange(Nx) + 0.5) / Nx
        error = np.mean(np.abs(sub.evaluate(0.5, x) - entropy_solution(SINE, 0.5, x)))
        assert error <= 5 / Nx

    def test_flux_relations_improve_under_refinement(self):
        sub = shock_free_substitute(SINE, 0.1)
        results = [verify_proposition(sub, SpaceTimeGrid(N, N, 0.1)) for N in (64, 128, 256)]
        recovery = [result["recovery"] for result in results]
        assert recovery[0] > recovery[1] > recovery[2]
        assert recovery[2] <= 1e-3
        assert all(result["rho_min"] > 0 for result in results)


def test_solver_subsolution_dominates_the_weighted_entropy():
    burgers = get_model("burgers")
    record = manufacture_strong_solution(burgers, Scenario("burgers_characteristics", 0.1, SINE), 32, 16, order=2)
    weight = adapt_weight(burgers, record)
    config = SolverConfig(max_iterations=200, check_every=50, order=2)
    primal, _, _ = solve(burgers, record.grid, weight, record.v.values[0], config)
    K0 = record.entropy(burgers).K0
    assert primal.entropy(record.grid).weighted_integral(weight) >= weight.H0 * K0 - 1e-3
