import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import quad

from dualflow.errors import ConsistencyError, DomainError, StructuralError
from dualflow.framework import (
    EntropyTimeline,
    StrongSolutionRecord,
    WeightProfile,
    adapt_weight,
    adapted_gamma,
    conservativity_residual,
    constraint_violation,
    matrix_entropy,
    psd_part,
    range_coefficients,
    safeguarded_root,
    sharp,
    total_entropy,
    unsharp,
)
from dualflow.grid import DifferenceOperators, SpaceTimeGrid
from dualflow.models import get_model

from conftest import smooth_state


class TestWeightProfile:
    def test_tail_integral_closed_form(self):
        weight = WeightProfile.exponential(2.0, 1.5)
        assert weight.H(1.5) == pytest.approx(0.0, abs=1e-15)
        assert weight.H0 == pytest.approx((1 - np.exp(-3.0)) / 2.0)
        assert WeightProfile.constant(2.0).H0 == pytest.approx(2.0)

    def test_h_samples_end_at_zero_tail(self):
        grid = SpaceTimeGrid(4, 7, 0.7)
        weight = WeightProfile.exponential(1.3, 0.7)
        H = weight.H_samples(grid)
        assert H[-1] == 0.0
        assert np.all(np.diff(H) < 0)
        weight.check(grid)

    def test_horizon_must_match_grid(self):
        with pytest.raises(StructuralError):
            WeightProfile.constant(1.0).h_samples(SpaceTimeGrid(4, 4, 2.0))

    @pytest.mark.parametrize("gamma, T, scale", [(-1.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, 0.0)])
    def test_invalid_parameters(self, gamma, T, scale):
        with pytest.raises(ValueError):
            WeightProfile(gamma, T, scale)

    @pytest.mark.parametrize("gamma", [0.0, 0.7, 5.0])
    def test_weighted_integral_is_exact_for_piecewise_linear_samples(self, gamma):
        weight = WeightProfile.exponential(gamma, 1.0)
        t = np.linspace(0.0, 1.0, 5)
        f = np.array([1.0, 3.0, -2.0, 0.5, 4.0])

        def integrand(s):
            return np.exp(-gamma * s) * np.interp(s, t, f)

        expected = sum(quad(integrand, a, b)[0] for a, b in zip(t[:-1], t[1:]))
        assert weight.weighted_integral(t, f) == pytest.approx(expected, rel=1e-10)
        partial = sum(quad(integrand, a, b)[0] for a, b in [(0.0, 0.25), (0.25, 0.5), (0.5, 0.6)])
        assert weight.weighted_integral(t, f, upper=0.6) == pytest.approx(partial, rel=1e-10)

    def test_weighted_integral_of_one_is_H0(self):
        weight = WeightProfile.exponential(3.0, 2.0)
        t = np.linspace(0, 2, 3)
        assert weight.weighted_integral(t, np.ones(3)) == pytest.approx(weight.H0)

    def test_rescaled_and_describe(self):
        weight = WeightProfile.exponential(1.0, 1.0).rescaled(2.0)
        assert weight.h(0.0) == pytest.approx(2.0)
        assert weight.describe()["scale"] == 2.0


@pytest.mark.parametrize("lam, gamma", [(-0.3, 0.6), (0.2, 0.0), (0.0, 0.0)])
def test_adapted_gamma(lam, gamma):
    assert adapted_gamma(lam) == pytest.approx(gamma)


def test_entropy_timeline():
    timeline = EntropyTimeline(np.array([0.0, 0.5, 1.0]), np.array([2.0, 2.5, 1.0]))
    assert timeline.K0 == 2.0
    assert timeline.drift() == pytest.approx(0.5)
    assert list(timeline.to_frame().columns) == ["t", "K"]
    with pytest.raises(StructuralError):
        EntropyTimeline(np.zeros(2), np.zeros(3))


def test_barotropic_entropy_at_rest(barotropic, small_grid):
    v = np.ones((small_grid.Nt + 1, small_grid.Nx, 2))
    assert_allclose(barotropic.F(v[0, 0]), [[2.0, 1.0], [1.0, 1.0]])
    timeline = total_entropy(barotropic, small_grid, v)
    assert_allclose(timeline.K_samples, 1.5)
    assert_allclose(matrix_entropy(small_grid, barotropic.F(v)).K_samples, 1.5)


def test_burgers_entropy(burgers):
    assert burgers.K(np.array([2.0])) == pytest.approx(2.0)
    assert_allclose(burgers.F(np.array([3.0])), [[9.0]])


def test_domain_errors_name_the_cell(barotropic):
    v = np.ones((4, 2))
    v[2, 1] = 0.0
    with pytest.raises(DomainError) as info:
        barotropic.check_domain(v)
    assert info.value.cell == (2,)
    v[2, 1] = 1e-5
    barotropic.check_domain(v)
    with pytest.raises(DomainError):
        sharp(barotropic, v)


def test_sharp_inverse(model, rng):
    v = model.sample_states(rng, 50)
    assert_allclose(unsharp(model, sharp(model, v)), v, rtol=1e-9, atol=1e-12)


def test_analytic_derivatives(model):
    model.check_derivatives()


@settings(max_examples=50, deadline=None)
@given(
    q=st.floats(-5, 5),
    rho=st.floats(0.05, 5),
    name=st.sampled_from(["barotropic", "qhd", "korteweg"]),
)
def test_fluid_flux_is_positive_semidefinite_with_half_trace_entropy(q, rho, name):
    model = get_model(name)
    v = np.zeros(model.n)
    v[0], v[-1] = q, rho
    if model.n > 2:
        v[1] = 0.3
    F = model.F(v)
    assert np.linalg.eigvalsh(F)[0] >= -1e-9 * max(1.0, np.abs(F).max())
    assert model.K(v) == pytest.approx(0.5 * np.trace(F), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("order", [2, 4])
def test_L_annihilates_identity(model, order):
    ops = DifferenceOperators.build(16, 1 / 16, order)
    assert np.max(np.abs(model.L_apply(model.identity_field(16), ops))) <= 1e-12


@pytest.mark.parametrize("order", [2, 4])
def test_Lstar_is_the_transpose_of_L(model, order, rng):
    Nx = 12
    ops = DifferenceOperators.build(Nx, 1 / Nx, order)
    M = rng.standard_normal((Nx, model.N, model.N))
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    a = rng.standard_normal((Nx, model.n))
    lhs = np.sum(model.L_apply(M, ops) * a)
    rhs = np.sum(M * model.Lstar_apply(a, ops))
    assert abs(lhs - rhs) <= 1e-12 * np.linalg.norm(M) * np.linalg.norm(a) * Nx**2


@pytest.mark.parametrize("name", ["burgers", "qhd", "korteweg"])
def test_dynamics_preserve_the_linear_constraint(name, rng):
    model = get_model(name)
    Nx = 16
    ops = DifferenceOperators.build(Nx, 1 / Nx, 4)
    M = rng.standard_normal((Nx, model.N, model.N))
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    assert np.max(np.abs(model.lc_apply(model.L_apply(M, ops), ops))) <= 1e-9


def test_conservativity_residual_is_small(model):
    v = smooth_state(model, 256)
    assert conservativity_residual(model, v) <= 1e-5


def test_smooth_states_satisfy_the_constraint(model):
    ops = DifferenceOperators.build(64, 1 / 64, 4)
    assert constraint_violation(model, smooth_state(model, 64), ops) <= 1e-12


def test_range_coefficients_recover_constraint_images(rng):
    model = get_model("qhd")
    Nx = 16
    ops = DifferenceOperators.build(Nx, 1 / Nx, 2)
    eta = rng.standard_normal((Nx, 1))
    R = model.lcstar_apply(eta, ops)
    recovered = range_coefficients(model, R, ops)
    assert_allclose(model.lcstar_apply(recovered, ops), R, atol=1e-8)


def test_psd_part_and_safeguarded_root():
    a = np.array([[1.0, 0.0], [0.0, -2.0]])
    assert_allclose(psd_part(a), [[1.0, 0.0], [0.0, 0.0]], atol=1e-14)
    root, ok = safeguarded_root(lambda x: x**3 - 2.0, lambda x: 3 * x**2, np.array([0.0]), np.array([2.0]))
    assert ok.all()
    assert root[0] == pytest.approx(2 ** (1 / 3))


class TestStrongSolutionRecord:
    def test_stationary_record(self, barotropic, stationary_record):
        assert stationary_record.model_name == "barotropic"
        assert stationary_record.pi is None
        assert stationary_record.positivity_margin == 0.0
        report = stationary_record.validate(barotropic)
        assert report["entropy_drift"] == pytest.approx(0.0, abs=1e-14)
        assert report["sharp_residual"] == pytest.approx(0.0, abs=1e-12)

    def test_restrict(self, stationary_record):
        sub = stationary_record.restrict(0.25)
        assert sub.grid.Nt == 4
        assert sub.v.values.shape[0] == 5

    def test_burgers_record_validates(self, burgers, burgers_record):
        report = burgers_record.validate(burgers, sharp_tol=1e-2)
        assert report["entropy_drift"] < 1e-6

    def test_wrong_model_is_rejected(self, burgers, stationary_record):
        with pytest.raises(StructuralError):
            stationary_record.validate(burgers)

    def test_validate_flags_a_non_solution(self, barotropic):
        grid = SpaceTimeGrid(8, 4, 0.5)
        v = np.ones((5, 8, 2))
        v[:, :, 0] = np.linspace(0, 1, 5)[:, None]
        record = StrongSolutionRecord.build(barotropic, grid, v, order=2)
        with pytest.raises(ConsistencyError):
            record.validate(barotropic)

    def test_adapted_weight_at_rest_is_constant(self, barotropic, stationary_record):
        weight = adapt_weight(barotropic, stationary_record)
        assert weight.gamma == 0.0
        assert weight.T == pytest.approx(0.5)
