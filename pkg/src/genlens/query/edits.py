"""Mutating query operations: batch regex edits, labels, and notes.

All mutations are overlay entries; dataset bytes are never touched.
batch_edit works on resolved values, so re-running a pattern-eliminating
edit appends nothing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..dataset.overlay import (
    OP_DELETE,
    OP_LABEL,
    OP_NOTE,
    OP_SET,
    EditEntry,
    EditOverlay,
    resolve_row,
)
from ..dataset.records import DatasetFile
from ..errors import (
    IndexOutOfRange,
    InvalidNote,
    RegexError,
    ReservedKeyCollision,
    TypeMismatch,
    ValidationFailure,
)
from .views import View, primary_file

_DOLLAR_REF = re.compile(r"\$(\$|\d+)")


def _to_re_template(replace: str) -> str:
    """Accept `$1` capture refs alongside re's `\\1`; `$$` is a literal $."""

    def swap(m: re.Match) -> str:
        token = m.group(1)
        if token == "$":
            return "$"
        return f"\\{token}"

    return _DOLLAR_REF.sub(swap, replace)


@dataclass
class BatchEditResult:
    changed: int
    warnings: int  # changed rows that also carry the expected-answer field


def batch_edit(
    view: View,
    field: str,
    find: str,
    replace: str,
    overlay: EditOverlay,
    expected_field: str = "expected_answer",
) -> BatchEditResult:
    """Regex-substitute a string field across the view; returns counts.

    Appends a `set` entry per row whose resolved value actually changes.
    warnings counts changed rows that still carry expected_field, since
    the edit may invalidate the expected answer.
    """
    try:
        pattern = re.compile(find)
    except re.error as e:
        raise RegexError(find, str(e)) from e
    template = _to_re_template(replace)
    dataset = primary_file(view.base)
    changed = 0
    warnings = 0
    for i in view.row_indices:
        record = resolve_row(dataset, i, overlay)
        value = record.get(field)
        if value is None and field not in record:
            continue
        if not isinstance(value, str):
            raise TypeMismatch(field, "a string", i)
        try:
            new_value = pattern.sub(template, value)
        except re.error as e:
            raise RegexError(replace, str(e)) from e
        if new_value != value:
            overlay.append(
                EditEntry(dataset.id, i, field, OP_SET, new_value)
            )
            changed += 1
            if expected_field in record:
                warnings += 1
    return BatchEditResult(changed=changed, warnings=warnings)


def set_field(
    dataset: DatasetFile,
    row_index: int,
    field: str,
    value,
    overlay: EditOverlay,
) -> EditEntry:
    """Manual single-field edit (`set`); delete via delete_field."""
    if not 0 <= row_index < len(dataset):
        raise IndexOutOfRange(row_index, len(dataset))
    return overlay.append(EditEntry(dataset.id, row_index, field, OP_SET, value))


def delete_field(
    dataset: DatasetFile, row_index: int, field: str, overlay: EditOverlay
) -> EditEntry:
    if not 0 <= row_index < len(dataset):
        raise IndexOutOfRange(row_index, len(dataset))
    return overlay.append(EditEntry(dataset.id, row_index, field, OP_DELETE, None))


def set_labels(
    view: View,
    labels: list[str],
    mode: str,
    overlay: EditOverlay,
) -> int:
    """Add or remove labels across the view; returns entries appended.

    An entry is appended only when it changes the resolved label set, so
    repeated applications are no-ops.
    """
    if not labels or any(not isinstance(l, str) or not l.strip() for l in labels):
        raise ValidationFailure("labels must be non-empty strings")
    if mode not in ("add", "remove"):
        raise ValidationFailure(f"unknown label mode {mode!r}")
    dataset = primary_file(view.base)
    count = 0
    for i in view.row_indices:
        if "_labels" in dataset.record(i):
            raise ReservedKeyCollision("_labels", i)
        current = overlay.labels_for(dataset.id, i)
        for label in labels:
            present = label in current
            if (mode == "add" and present) or (mode == "remove" and not present):
                continue
            overlay.append(
                EditEntry(
                    dataset.id,
                    i,
                    "_labels",
                    OP_LABEL,
                    {"label": label, "mode": mode},
                )
            )
            if mode == "add":
                current.append(label)
            else:
                current.remove(label)
            count += 1
    return count


def annotate(
    dataset: DatasetFile, row_index: int, note: str, overlay: EditOverlay
) -> EditEntry:
    """Attach a free-form note; notes accumulate and are never superseded."""
    if not isinstance(note, str) or not note.strip():
        raise InvalidNote()
    if not 0 <= row_index < len(dataset):
        raise IndexOutOfRange(row_index, len(dataset))
    if "_notes" in dataset.record(row_index):
        raise ReservedKeyCollision("_notes", row_index)
    return overlay.append(EditEntry(dataset.id, row_index, "_notes", OP_NOTE, note))
