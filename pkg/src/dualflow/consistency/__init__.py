"""Optimal dual pairs of strong solutions, their certificates, and v# recovery."""

from dualflow.consistency.recovery import RecoveredSharp, gauge_fix, recover_sharp, tail_integral, trig_filter
from dualflow.consistency.certificate import (
    CHECKS,
    OptimalPairCertificate,
    build_optimal_pair,
    constraint_residual,
    trial_fields,
    stationarity_residual,
    verify_certificate,
)

__all__ = [
    "RecoveredSharp",
    "gauge_fix",
    "recover_sharp",
    "tail_integral",
    "trig_filter",
    "CHECKS",
    "OptimalPairCertificate",
    "build_optimal_pair",
    "constraint_residual",
    "trial_fields",
    "stationarity_residual",
    "verify_certificate",
]
