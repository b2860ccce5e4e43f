"""Per-question statistics across homogeneous runs.

Builtins: correct_ratio, incorrect_ratio, no_answer_ratio, persistence,
majority_correct. Custom statistics run through the script host and get
the cross-run record list per question (the `datas` convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from ..dataset.overlay import EditOverlay, resolve_row
from ..dataset.records import Record, RunGroup
from ..errors import ScriptError, UnknownField
from .answers import CORRECT, EMPTY, Normalized, grade, normalize_answer

if TYPE_CHECKING:
    from ..scripting.host import Script, ScriptHost

BUILTIN_STAT_NAMES = (
    "correct_ratio",
    "incorrect_ratio",
    "no_answer_ratio",
    "persistence",
    "majority_correct",
)

_MISSING = object()


@dataclass
class AnswerHistogram:
    """Occurrence counts of normalized answers across one question's runs."""

    counts: dict[str, int]
    total: int
    empty_count: int


@dataclass
class StatisticDef:
    name: str
    kind: str = "builtin"  # builtin | custom
    script_id: str | None = None
    export: str | None = None


@dataclass
class StatReport:
    stat: str
    per_question: list[Any]
    aggregate: float | None
    errors: list[dict[str, Any]] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "stat": self.stat,
            "aggregate": self.aggregate,
            "per_question": self.per_question,
        }
        if self.errors:
            out["errors"] = self.errors
        return out


def answer_histogram(
    records: list[Record],
    answer_field: str = "predicted_answer",
    normalize: bool = True,
) -> AnswerHistogram:
    """Count normalized non-empty answers; absent fields count as EMPTY.

    Key order is first-occurrence order across the run sequence.
    """
    counts: dict[str, int] = {}
    empty = 0
    for record in records:
        norm = normalize_answer(record.get(answer_field), normalize=normalize)
        if norm is EMPTY:
            empty += 1
        else:
            counts[norm] = counts.get(norm, 0) + 1
    return AnswerHistogram(counts=counts, total=len(records), empty_count=empty)


def persistence(
    records: list[Record],
    answer_field: str = "predicted_answer",
    normalize: bool = True,
) -> int:
    """Maximum run count sharing one identical answer; 0 when all empty."""
    hist = answer_histogram(records, answer_field=answer_field, normalize=normalize)
    return max(hist.counts.values(), default=0)


def majority_answer(
    records: list[Record],
    answer_field: str = "predicted_answer",
    normalize: bool = True,
) -> tuple[Normalized, int]:
    """Most frequent non-empty answer and its count.

    Ties break to the earliest first occurrence in run order; all-empty
    input yields (EMPTY, 0).
    """
    hist = answer_histogram(records, answer_field=answer_field, normalize=normalize)
    if not hist.counts:
        return EMPTY, 0
    # dicts preserve first-occurrence order, max() keeps the first maximum
    answer = max(hist.counts, key=hist.counts.get)
    return answer, hist.counts[answer]


def _expected_for_question(
    records: list[Record], expected_field: str, question_index: int
) -> Any:
    for record in records:
        value = record.get(expected_field, _MISSING)
        if value is not _MISSING:
            return value
    raise UnknownField(expected_field, question_index)


def question_records(
    group: RunGroup, question_index: int, overlay: EditOverlay | None = None
) -> list[Record]:
    """Overlay-resolved cross-run records for one question."""
    return [resolve_row(f, question_index, overlay) for f in group.files]


def builtin_stats(
    group: RunGroup,
    expected_field: str = "expected_answer",
    overlay: EditOverlay | None = None,
    answer_field: str = "predicted_answer",
    normalize: bool = True,
) -> dict[str, StatReport]:
    """All five builtin reports for a group; aggregate is the mean."""
    columns: dict[str, list[Any]] = {name: [] for name in BUILTIN_STAT_NAMES}
    run_count = len(group.files)
    for q in range(group.question_count):
        records = question_records(group, q, overlay)
        expected = _expected_for_question(records, expected_field, q)
        grades = [grade(r.get(answer_field), expected) for r in records]
        n_correct = grades.count(CORRECT)
        n_no_answer = grades.count("no_answer")
        n_incorrect = run_count - n_correct - n_no_answer
        columns["correct_ratio"].append(n_correct / run_count)
        columns["incorrect_ratio"].append(n_incorrect / run_count)
        columns["no_answer_ratio"].append(n_no_answer / run_count)
        columns["persistence"].append(
            persistence(records, answer_field=answer_field, normalize=normalize)
        )
        majority, _ = majority_answer(
            records, answer_field=answer_field, normalize=normalize
        )
        majority_value = None if majority is EMPTY else majority
        columns["majority_correct"].append(
            1 if grade(majority_value, expected) == CORRECT else 0
        )
    return {
        name: StatReport(
            stat=name,
            per_question=values,
            aggregate=(sum(values) / len(values)) if values else None,
        )
        for name, values in columns.items()
    }


def compute_custom_stat(
    group: RunGroup,
    host: "ScriptHost",
    script: "Script",
    export: str,
    overlay: EditOverlay | None = None,
    stat_name: str | None = None,
) -> StatReport:
    """Run a custom per-question statistic; failures yield partial results.

    A failing question contributes None to per_question and one entry to
    errors; the remaining questions still compute.
    """
    per_question: list[Any] = []
    errors: list[dict[str, Any]] = []
    for q in range(group.question_count):
        records = question_records(group, q, overlay)
        try:
            per_question.append(host.invoke(script, export, records))
        except Exception as e:  # sandbox errors carry their own kinds
            err = ScriptError(q, str(e))
            errors.append({"question_index": q, "message": err.message})
            per_question.append(None)
    numeric = [v for v in per_question if isinstance(v, (int, float)) and not isinstance(v, bool)]
    aggregate = (sum(numeric) / len(numeric)) if numeric else None
    return StatReport(
        stat=stat_name or export,
        per_question=per_question,
        aggregate=aggregate,
        errors=errors,
    )
