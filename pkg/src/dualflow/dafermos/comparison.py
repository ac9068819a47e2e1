"""Entropy comparison of relaxed subsolutions against strong solutions."""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from dualflow.config import DAFERMOS_GAMMA_CAP, DAFERMOS_GAMMA_FACTOR, DAFERMOS_MARGIN, FEAS_ABS_TOLERANCE
from dualflow.errors import PreconditionError, StructuralError
from dualflow.framework.entropy import EntropyTimeline
from dualflow.framework.weights import WeightProfile, adapt_weight

logger = logging.getLogger(__name__)

VERDICTS = ("no-violation", "inconsistent-subsolution", "inconclusive")


@dataclass
class ComparisonVerdict:
    """
    Outcome of an entropy comparison on [0, T1].

    Attributes:
        t0: End of the window where the subsolution entropy may only touch K.
        t1: End of the window where it must stay below K - margin.
        t2: Pivot in (t0, t1) splitting the early deficit from the later excess.
        T1: Horizon of the weights and of the integrals, >= t1.
        margin: The margin delta.
        weighted_integrals: Rows (gamma, int_0^T1 h K~, H(0) K0) of the escalation.
        verdict: One of VERDICTS.
        witness_gamma: First gamma with int h K~ < H(0) K0 - tol, if any.
        diagnostics: Free-form details of the decision.
    """

    t0: float
    t1: float
    t2: float
    T1: float
    margin: float
    weighted_integrals: list = field(default_factory=list)
    verdict: str = "inconclusive"
    witness_gamma: float = None
    diagnostics: dict = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.weighted_integrals, columns=["gamma", "subsolution", "target"])

    def to_dict(self) -> dict:
        return {
            "t0": self.t0,
            "t1": self.t1,
            "t2": self.t2,
            "T1": self.T1,
            "margin": self.margin,
            "verdict": self.verdict,
            "witness_gamma": self.witness_gamma,
            "weighted_integrals": [list(row) for row in self.weighted_integrals],
            "diagnostics": self.diagnostics,
        }


def escalation_sequence(gamma0: float = 0.0, factor: float = DAFERMOS_GAMMA_FACTOR, cap: float = DAFERMOS_GAMMA_CAP):
    """gamma0, then factor * max(gamma, 1 / factor) until the cap."""
    gamma = max(0.0, float(gamma0))
    while gamma <= cap:
        yield gamma
        gamma = factor * max(gamma, 1.0 / factor)


def compare_timelines(
    sub: EntropyTimeline,
    strong: EntropyTimeline,
    t0: float,
    t1: float,
    t2: float = None,
    margin: float = None,
    gamma0: float = 0.0,
    tol: float = None,
    T1: float = None,
) -> ComparisonVerdict:
    """
    Run the weighted-integral comparison on two entropy timelines.

    The subsolution violates the strong entropy when K~ <= K on [0, t0] and
    K~ < K - margin on (t0, t1). Then weights h = exp(-gamma t) on [0, T1]
    with growing gamma are tried until int_0^T1 h K~ < H(0) K0 - tol, which
    contradicts the equality of the relaxed optimum with H(0) K0. Whatever
    K~ does on (t1, T1] enters the integrals, so an excess there forces
    gamma up until the early deficit dominates.

    Args:
        sub: Subsolution timeline K~.
        strong: Strong solution timeline K on the same nodes.
        t0: Start of the violation window, >= 0.
        t1: End of the violation window, <= T1.
        t2: Pivot in (t0, t1); the midpoint by default. Reported with the
            deficit on (t0, t2) and the excess on (t1, T1).
        margin: The margin delta; DAFERMOS_MARGIN * max |K| by default.
        gamma0: First gamma, usually the one adapted on [0, T1].
        tol: Slack of the integral test; 1e-10 * max(1, H(0) |K0|) by default.
        T1: Horizon of the weights, in [t1, last node]; the last node by default.

    Returns:
        The ComparisonVerdict.

    Raises:
        PreconditionError: If the windows do not fit the nodes.
        StructuralError: If the timelines live on different nodes.
    """
    t = np.asarray(strong.t, dtype=float)
    if sub.t.shape != t.shape or not np.allclose(sub.t, t, rtol=0, atol=1e-12):
        raise StructuralError("entropy timelines live on different time nodes")
    T1 = float(t[-1]) if T1 is None else float(T1)
    if not (t[0] <= t0 < t1 <= T1 <= t[-1]):
        raise PreconditionError(f"need {t[0]} <= t0 < t1 <= T1 <= {t[-1]}, got t0={t0} t1={t1} T1={T1}")
    t2 = 0.5 * (t0 + t1) if t2 is None else float(t2)
    if not t0 < t2 < t1:
        raise PreconditionError(f"t2={t2} outside ({t0}, {t1})")
    K, Ks = strong.K_samples, sub.K_samples
    scale = max(1.0, float(np.max(np.abs(K))))
    margin = DAFERMOS_MARGIN * float(np.max(np.abs(K))) if margin is None else float(margin)

    head = t <= t0
    window = (t > t0) & (t < t1)
    if not np.any(window):
        raise PreconditionError(f"no time node strictly inside ({t0}, {t1})")
    verdict = ComparisonVerdict(t0, t1, t2, T1, margin)
    unit = WeightProfile.constant(T1)

    def excess_on(a, b):
        return unit.weighted_integral(t, Ks - K, upper=b) - unit.weighted_integral(t, Ks - K, upper=a)

    verdict.diagnostics = {
        "head_excess": float(np.max(Ks[head] - K[head])),
        "window_excess": float(np.max(Ks[window] - K[window])),
        "deficit_to_t2": float(excess_on(t0, t2)),
        "tail_excess": float(excess_on(t1, T1)),
        "K0": strong.K0,
    }
    touching = bool(np.all(Ks[head] <= K[head] + 1e-12 * scale))
    below = bool(np.all(Ks[window] < K[window] - margin))
    if not (touching and below):
        verdict.verdict = "no-violation"
        logger.info("entropy comparison: subsolution does not undercut K on (%g, %g)", t0, t1)
        return verdict

    for gamma in escalation_sequence(gamma0):
        weight = WeightProfile.exponential(gamma, T1)
        target = weight.H0 * strong.K0
        slack = 1e-10 * max(1.0, abs(target)) if tol is None else tol
        value = sub.weighted_integral(weight, upper=T1)
        verdict.weighted_integrals.append((gamma, value, target))
        logger.debug("gamma=%g: int h K~ = %.12g, H(0) K0 = %.12g", gamma, value, target)
        if value < target - slack:
            verdict.verdict = "inconsistent-subsolution"
            verdict.witness_gamma = gamma
            logger.info("entropy comparison: violation witnessed at gamma=%g on [0, %g]", gamma, T1)
            return verdict
    verdict.verdict = "inconclusive"
    logger.warning("entropy comparison inconclusive up to gamma=%g", DAFERMOS_GAMMA_CAP)
    return verdict


def compare(
    model,
    strong,
    sub,
    t0: float,
    t1: float,
    t2: float = None,
    margin: float = None,
    feasibility_tol: float = FEAS_ABS_TOLERANCE,
    relaxation_tol: float = FEAS_ABS_TOLERANCE,
    order: int = None,
    T1: float = None,
) -> ComparisonVerdict:
    """
    Compare a verified subsolution with a strong solution from the same datum.

    The escalation starts from the weight adapted to the strong solution on
    [0, T1].

    Args:
        model: The ModelSpec.
        strong: StrongSolutionRecord on [0, T].
        sub: PrimalPair on the record's grid.
        t0, t1: Comparison windows, 0 <= t0 < t1 <= T1.
        t2: Pivot of the deficit window; midpoint of (t0, t1) by default.
        margin: The margin delta.
        feasibility_tol: Bound on the dynamics residual of the subsolution.
        relaxation_tol: Bound on the excess of F(v) over M.
        order: Stencil order of the subsolution dynamics; the record's by default.
        T1: Weight horizon, a node of the record's grid; T by default.

    Returns:
        The ComparisonVerdict.

    Raises:
        PreconditionError: If sub is not a subsolution within tolerance or
            starts from a different datum.
    """
    grid = strong.grid
    sub.v.check_grid(grid, model.n)
    sub.M.check_grid(grid, model.N)
    dynamics = sub.dynamics_residual(model, grid, strong.order if order is None else order)
    relaxation = sub.relaxation_residual(model)
    start = float(np.max(np.abs(sub.v.values[0] - strong.v.values[0])))
    if dynamics > feasibility_tol:
        raise PreconditionError(f"subsolution dynamics residual {dynamics:.3e} exceeds {feasibility_tol:.1e}")
    if relaxation > relaxation_tol:
        raise PreconditionError(f"F(v) exceeds M by {relaxation:.3e}")
    if start > feasibility_tol:
        raise PreconditionError(f"subsolution starts {start:.3e} away from the strong datum")

    T1 = grid.T if T1 is None else float(T1)
    if not t1 <= T1 <= grid.T:
        raise PreconditionError(f"T1={T1} outside [{t1}, {grid.T}]")
    weight = adapt_weight(model, strong, T1)
    verdict = compare_timelines(sub.entropy(grid), strong.entropy(model), t0, t1, t2, margin, weight.gamma, T1=weight.T)
    verdict.diagnostics.update({"dynamics_residual": dynamics, "relaxation_residual": relaxation, "gamma0": weight.gamma})
    return verdict
