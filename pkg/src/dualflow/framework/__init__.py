"""Abstract model machinery: entropy, sharp variables, weights and residuals."""

from dualflow.framework.model import ModelSpec, psd_floor, range_coefficients
from dualflow.framework.numerics import frobenius, min_eigenvalue, psd_part, safeguarded_root, symmetric_eig
from dualflow.framework.entropy import EntropyTimeline, matrix_entropy, sharp, total_entropy, unsharp
from dualflow.framework.weights import WeightProfile, adapt_weight, adapted_gamma
from dualflow.framework.residuals import (
    conservativity_residual,
    constraint_violation,
    reconstruct_multiplier,
    sharp_defect,
    sharp_residual,
)
from dualflow.framework.records import StrongSolutionRecord, node_min_eigenvalues

__all__ = [
    "ModelSpec",
    "psd_floor",
    "range_coefficients",
    "frobenius",
    "min_eigenvalue",
    "psd_part",
    "safeguarded_root",
    "symmetric_eig",
    "EntropyTimeline",
    "matrix_entropy",
    "sharp",
    "total_entropy",
    "unsharp",
    "WeightProfile",
    "adapt_weight",
    "adapted_gamma",
    "conservativity_residual",
    "constraint_violation",
    "reconstruct_multiplier",
    "sharp_defect",
    "sharp_residual",
    "StrongSolutionRecord",
    "node_min_eigenvalues",
]
