import numpy as np
import pytest

from dualflow.dafermos import VERDICTS, compare, compare_timelines, escalation_sequence
from dualflow.dual_solver import PrimalPair
from dualflow.errors import PreconditionError, StructuralError
from dualflow.framework import EntropyTimeline
from dualflow.grid import MatrixField, StateField

T = np.linspace(0.0, 1.0, 11)
EPS = 0.1


def _dipping(depth=0.1):
    sub = np.ones_like(T)
    sub[1:5] -= depth
    return EntropyTimeline(T, sub)


def _early_dissipation():
    """K~ = K - eps (1 - 2t): below K on (0, 1/2), above it afterwards."""
    return EntropyTimeline(T, 1.0 - EPS * (1.0 - 2.0 * T))


def _exp_moments(gamma, T1):
    """int_0^T1 exp(-gamma t) dt and int_0^T1 t exp(-gamma t) dt."""
    if gamma == 0:
        return T1, 0.5 * T1**2
    decay = np.exp(-gamma * T1)
    return (1.0 - decay) / gamma, (1.0 - decay * (1.0 + gamma * T1)) / gamma**2


def test_escalation_sequence():
    assert list(escalation_sequence(0.0, factor=4, cap=100)) == [0.0, 1.0, 4.0, 16.0, 64.0]
    assert list(escalation_sequence(3.0, factor=2, cap=20)) == [3.0, 6.0, 12.0]


class TestCompareTimelines:
    def test_early_dissipation_is_inconsistent(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        verdict = compare_timelines(_early_dissipation(), strong, 0.0, 0.5, margin=0.01)
        assert verdict.verdict == "inconsistent-subsolution"
        assert verdict.T1 == 1.0
        assert verdict.t2 == pytest.approx(0.25)
        # gamma = 0 balances deficit and excess exactly, so gamma has to grow
        assert verdict.witness_gamma == 1.0
        assert [row[0] for row in verdict.weighted_integrals] == [0.0, 1.0]
        for gamma, value, target in verdict.weighted_integrals:
            m0, m1 = _exp_moments(gamma, 1.0)
            assert value == pytest.approx((1.0 - EPS) * m0 + 2.0 * EPS * m1, abs=1e-10)
            assert target == pytest.approx(m0, abs=1e-10)
        assert list(verdict.to_frame().columns) == ["gamma", "subsolution", "target"]
        assert verdict.to_dict()["verdict"] in VERDICTS

    def test_later_excess_forces_a_large_gamma(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        values = np.ones_like(T)
        values[1:5] = 0.9
        values[6:] = 6.0
        verdict = compare_timelines(EntropyTimeline(T, values), strong, 0.0, 0.5, margin=0.01)
        assert verdict.verdict == "inconsistent-subsolution"
        gamma, value, target = verdict.weighted_integrals[0]
        assert gamma == 0.0
        assert value == pytest.approx(3.21)
        assert target == pytest.approx(1.0)
        assert verdict.witness_gamma == 16.0
        assert verdict.diagnostics["tail_excess"] > 0 > verdict.diagnostics["deficit_to_t2"]

    def test_horizon_at_t1_leaves_out_the_later_excess(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        verdict = compare_timelines(_early_dissipation(), strong, 0.0, 0.5, margin=0.01, T1=0.5)
        assert verdict.witness_gamma == 0.0
        gamma, value, target = verdict.weighted_integrals[0]
        assert value == pytest.approx(0.5 - 0.5 * EPS + EPS * 0.25, abs=1e-12)
        assert target == pytest.approx(0.5)

    def test_equal_entropies_show_no_violation(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        verdict = compare_timelines(strong, strong, 0.0, 0.5)
        assert verdict.verdict == "no-violation"
        assert verdict.weighted_integrals == []
        assert verdict.margin == pytest.approx(1e-4)

    def test_excess_at_the_start_shows_no_violation(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        sub = _dipping()
        values = sub.K_samples.copy()
        values[0] = 1.1
        verdict = compare_timelines(EntropyTimeline(T, values), strong, 0.0, 0.5, margin=0.01)
        assert verdict.verdict == "no-violation"
        assert verdict.diagnostics["head_excess"] == pytest.approx(0.1)

    def test_large_slack_is_inconclusive(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        verdict = compare_timelines(_dipping(), strong, 0.0, 0.5, margin=0.01, tol=10.0)
        assert verdict.verdict == "inconclusive"
        assert verdict.witness_gamma is None
        assert len(verdict.weighted_integrals) > 2

    def test_windows_must_fit(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        with pytest.raises(PreconditionError):
            compare_timelines(strong, strong, 0.5, 0.2)
        with pytest.raises(PreconditionError):
            compare_timelines(strong, strong, 0.0, 2.0)
        with pytest.raises(PreconditionError):
            compare_timelines(strong, strong, T[1], T[2])
        with pytest.raises(PreconditionError):
            compare_timelines(strong, strong, 0.0, 0.5, t2=0.8)
        with pytest.raises(PreconditionError):
            compare_timelines(strong, strong, 0.0, 0.5, t2=0.5)
        with pytest.raises(PreconditionError):
            compare_timelines(strong, strong, 0.0, 0.5, T1=0.4)

    def test_timelines_must_share_nodes(self):
        strong = EntropyTimeline(T, np.ones_like(T))
        other = EntropyTimeline(np.linspace(0, 1, 6), np.ones(6))
        with pytest.raises(StructuralError):
            compare_timelines(other, strong, 0.0, 0.5)


def _pair(model, v, shift=0.0):
    M = model.F(v) + shift * np.eye(model.N)
    return PrimalPair(StateField(v, model.labels), MatrixField(M))


class TestCompare:
    def test_strong_solution_is_its_own_subsolution(self, barotropic, stationary_record):
        sub = _pair(barotropic, stationary_record.v.values)
        verdict = compare(barotropic, stationary_record, sub, 0.0, 0.5)
        assert verdict.verdict == "no-violation"
        assert verdict.diagnostics["dynamics_residual"] == pytest.approx(0.0, abs=1e-14)
        assert verdict.diagnostics["relaxation_residual"] == 0.0
        assert verdict.diagnostics["gamma0"] == 0.0

    def test_inflated_subsolution_carries_more_entropy(self, barotropic, stationary_record):
        sub = _pair(barotropic, stationary_record.v.values, shift=0.1)
        excess = sub.entropy(stationary_record.grid).K_samples - stationary_record.entropy(barotropic).K_samples
        np.testing.assert_allclose(excess, 0.1, atol=1e-12)
        verdict = compare(barotropic, stationary_record, sub, 0.0, 0.5)
        assert verdict.verdict == "no-violation"

    def test_relaxation_defect_is_rejected(self, barotropic, stationary_record):
        sub = _pair(barotropic, stationary_record.v.values, shift=-0.1)
        with pytest.raises(PreconditionError):
            compare(barotropic, stationary_record, sub, 0.0, 0.5)

    def test_other_datum_is_rejected(self, barotropic, stationary_record):
        v = stationary_record.v.values.copy()
        v[..., 1] = 1.1
        with pytest.raises(PreconditionError):
            compare(barotropic, stationary_record, _pair(barotropic, v), 0.0, 0.5)

    def test_dynamics_defect_is_rejected(self, barotropic, stationary_record):
        v = stationary_record.v.values.copy()
        v[1:, :, 0] = 0.2
        with pytest.raises(PreconditionError):
            compare(barotropic, stationary_record, _pair(barotropic, v), 0.0, 0.5)
