"""Inter-parameter statistics: grading, histograms, persistence, majority vote."""

from .answers import CORRECT, EMPTY, INCORRECT, NO_ANSWER, grade, normalize_answer
from .engine import (
    BUILTIN_STAT_NAMES,
    AnswerHistogram,
    StatisticDef,
    StatReport,
    answer_histogram,
    builtin_stats,
    compute_custom_stat,
    majority_answer,
    persistence,
    question_records,
)

__all__ = [
    "AnswerHistogram",
    "BUILTIN_STAT_NAMES",
    "CORRECT",
    "EMPTY",
    "INCORRECT",
    "NO_ANSWER",
    "StatReport",
    "StatisticDef",
    "answer_histogram",
    "builtin_stats",
    "compute_custom_stat",
    "grade",
    "majority_answer",
    "normalize_answer",
    "persistence",
    "question_records",
]
