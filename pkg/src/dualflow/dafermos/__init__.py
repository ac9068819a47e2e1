"""Entropy comparison harness for relaxed subsolutions."""

from dualflow.dafermos.comparison import VERDICTS, ComparisonVerdict, compare, compare_timelines, escalation_sequence

__all__ = ["VERDICTS", "ComparisonVerdict", "compare", "compare_timelines", "escalation_sequence"]
