"""Exact Burgers entropy solutions and the shock-free substitute."""

from dualflow.burgers_exact.potential import Potential
from dualflow.burgers_exact.lax_oleinik import entropy_solution, hopf_lax_minimizer
from dualflow.burgers_exact.envelope import Envelope, convex_envelope, lower_hull, quadratic_envelope
from dualflow.burgers_exact.substitute import (
    DualMeasures1D,
    ShockFreeSubstitute,
    dual_measures,
    shock_free_substitute,
    verify_proposition,
)

__all__ = [
    "Potential",
    "entropy_solution",
    "hopf_lax_minimizer",
    "Envelope",
    "convex_envelope",
    "lower_hull",
    "quadratic_envelope",
    "DualMeasures1D",
    "ShockFreeSubstitute",
    "dual_measures",
    "shock_free_substitute",
    "verify_proposition",
]
