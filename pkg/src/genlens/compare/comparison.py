"""Side-by-side comparison of heterogeneous runs with diff decorations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..dataset.overlay import EditOverlay, resolve_row
from ..dataset.records import DatasetFile, Record
from ..errors import PairingError
from ..stats.answers import grade
from .diff import DiffSpan, diff_texts

DEFAULT_DIFF_FIELDS = ("question", "generation")


@dataclass
class ComparisonSet:
    """Named runs paired by row index or by a key field.

    Index pairing exposes min(run lengths) rows; key pairing exposes the
    first run's rows and resolves matches lazily (PairingError when a key
    is absent elsewhere).
    """

    runs: list[tuple[str, DatasetFile]]
    pairing_key: str | None = None
    overlays: dict[str, EditOverlay] = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = [name for name, _ in self.runs]
        if len(set(names)) != len(names):
            raise ValueError("run names must be unique")
        if not self.runs:
            raise ValueError("a comparison needs at least one run")
        self._key_index: list[dict[Any, int]] | None = None
        if self.pairing_key is not None:
            self._key_index = []
            for _, dataset in self.runs:
                index: dict[Any, int] = {}
                for i in range(len(dataset)):
                    value = dataset.record(i).get(self.pairing_key)
                    index.setdefault(self._hashable(value), i)
                self._key_index.append(index)

    @staticmethod
    def _hashable(value: Any) -> Any:
        if isinstance(value, (dict, list)):
            return json.dumps(value, sort_keys=True)
        return value

    @property
    def row_count(self) -> int:
        if self.pairing_key is not None:
            return len(self.runs[0][1])
        return min(len(dataset) for _, dataset in self.runs)

    def paired_rows(self, row: int) -> list[tuple[str, int, Record]]:
        """(run name, row index, resolved record) per run for one exposed row."""
        if not 0 <= row < self.row_count:
            raise PairingError(row, f"row out of range (0..{self.row_count - 1})")
        out = []
        if self.pairing_key is None:
            for name, dataset in self.runs:
                out.append((name, row, self._resolve(name, dataset, row)))
            return out
        first_name, first = self.runs[0]
        key_value = first.record(row).get(self.pairing_key)
        if key_value is None and self.pairing_key not in first.record(row):
            raise PairingError(row, f"key {self.pairing_key!r} missing in run {first_name!r}")
        hashable = self._hashable(key_value)
        for pos, (name, dataset) in enumerate(self.runs):
            match = self._key_index[pos].get(hashable)
            if match is None:
                raise PairingError(row, f"key {key_value!r} not found in run {name!r}")
            out.append((name, match, self._resolve(name, dataset, match)))
        return out

    def _resolve(self, name: str, dataset: DatasetFile, row: int) -> Record:
        return resolve_row(dataset, row, self.overlays.get(name))


def build_comparison(
    cmp: ComparisonSet,
    rows: list[int] | None = None,
    diff_fields: tuple[str, ...] = DEFAULT_DIFF_FIELDS,
    granularity: str = "word",
) -> list[dict[str, Any]]:
    """Paired rows with per-field diffs of each run against the first run."""
    if rows is None:
        rows = list(range(cmp.row_count))
    out = []
    for row in rows:
        paired = cmp.paired_rows(row)
        _, _, baseline = paired[0]
        entries = []
        for pos, (name, run_row, record) in enumerate(paired):
            diffs: dict[str, list[DiffSpan]] = {}
            if pos > 0:
                for fname in diff_fields:
                    a, b = baseline.get(fname), record.get(fname)
                    if isinstance(a, str) and isinstance(b, str):
                        diffs[fname] = diff_texts(a, b, granularity=granularity)
            entries.append(
                {"run": name, "row_index": run_row, "record": record, "diffs": diffs}
            )
        out.append({"row": row, "runs": entries})
    return out


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def run_grades(
    cmp: ComparisonSet,
    expected_field: str = "expected_answer",
    answer_field: str = "predicted_answer",
) -> list[list[str]]:
    """grade() per exposed row (outer) and run (inner)."""
    grades = []
    for row in range(cmp.row_count):
        paired = cmp.paired_rows(row)
        grades.append(
            [grade(r.get(answer_field), r.get(expected_field)) for _, _, r in paired]
        )
    return grades


def agreement_flags(
    cmp: ComparisonSet,
    grades: list[list[str]],
    generation_field: str = "generation",
    exact_match: bool = False,
) -> list[dict[str, Any]]:
    """Per-row agreement analysis across runs.

    same_generation: generation texts equal (whitespace-normalized unless
    exact_match). disagreeing_correctness: grades differ. Rows with both
    flags are the suspect class: likely a wrong expected answer.
    """
    out = []
    for row in range(cmp.row_count):
        paired = cmp.paired_rows(row)
        texts = []
        for _, _, record in paired:
            value = record.get(generation_field)
            text = value if isinstance(value, str) else ""
            texts.append(text if exact_match else _normalize_ws(text))
        same_generation = len(set(texts)) <= 1
        disagreeing = len(set(grades[row])) > 1
        out.append(
            {
                "row": row,
                "same_generation": same_generation,
                "disagreeing_correctness": disagreeing,
                "suspect": same_generation and disagreeing,
            }
        )
    return out
