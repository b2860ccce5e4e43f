"""Side-by-side comparison and word-level difference highlighting."""

from .comparison import (
    ComparisonSet,
    agreement_flags,
    build_comparison,
    run_grades,
)
from .diff import DELETE, EQUAL, INSERT, DiffSpan, diff_texts, reconstruct

__all__ = [
    "ComparisonSet",
    "DELETE",
    "EQUAL",
    "INSERT",
    "DiffSpan",
    "agreement_flags",
    "build_comparison",
    "diff_texts",
    "reconstruct",
    "run_grades",
]
