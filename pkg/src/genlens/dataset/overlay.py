"""Non-destructive edit journal: sets, deletes, labels, and notes.

The overlay never touches dataset bytes. Entries apply in journal order;
later set/delete entries on the same (file, row, field) supersede earlier
ones, labels form an ordered add/remove set, notes accumulate. Resolved
rows expose labels and notes under the reserved keys `_labels`/`_notes`.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field as dc_field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable

from ..errors import ReservedKeyCollision
from .records import DatasetFile, Record

RESERVED_KEYS = ("_labels", "_notes")

OP_SET = "set"
OP_DELETE = "delete"
OP_LABEL = "label"
OP_NOTE = "note"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class EditEntry:
    file_id: str
    row_index: int
    field: str
    op: str
    value: Any
    timestamp: str = dc_field(default_factory=_utc_now)

    def to_json(self) -> dict[str, Any]:
        return {
            "file_id": self.file_id,
            "row_index": self.row_index,
            "field": self.field,
            "op": self.op,
            "value": self.value,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "EditEntry":
        return cls(
            file_id=obj["file_id"],
            row_index=int(obj["row_index"]),
            field=obj["field"],
            op=obj["op"],
            value=obj.get("value"),
            timestamp=obj.get("timestamp", ""),
        )


class EditOverlay:
    """Ordered journal of EditEntry. Single writer, many readers."""

    def __init__(self, entries: Iterable[EditEntry] = ()):
        self.entries: list[EditEntry] = list(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entry: EditEntry) -> EditEntry:
        if entry.op in (OP_SET, OP_DELETE) and entry.field in RESERVED_KEYS:
            raise ReservedKeyCollision(entry.field, entry.row_index)
        self.entries.append(entry)
        return entry

    def entries_for(self, file_id: str, row_index: int) -> list[EditEntry]:
        return [
            e
            for e in self.entries
            if e.file_id == file_id and e.row_index == row_index
        ]

    def labels_for(self, file_id: str, row_index: int) -> list[str]:
        labels: list[str] = []
        for e in self.entries_for(file_id, row_index):
            if e.op != OP_LABEL:
                continue
            name, mode = e.value["label"], e.value["mode"]
            if mode == "add" and name not in labels:
                labels.append(name)
            elif mode == "remove" and name in labels:
                labels.remove(name)
        return labels

    def notes_for(self, file_id: str, row_index: int) -> list[str]:
        return [
            e.value
            for e in self.entries_for(file_id, row_index)
            if e.op == OP_NOTE
        ]


def resolve_row(
    dataset: DatasetFile, row_index: int, overlay: EditOverlay | None = None
) -> Record:
    """Base record with overlay applied; safe to mutate (always a copy)."""
    record = copy.deepcopy(dataset.record(row_index))
    if overlay is None:
        return record
    labels: list[str] = []
    notes: list[str] = []
    for e in overlay.entries_for(dataset.id, row_index):
        if e.op == OP_SET:
            record[e.field] = copy.deepcopy(e.value)
        elif e.op == OP_DELETE:
            record.pop(e.field, None)
        elif e.op == OP_LABEL:
            name, mode = e.value["label"], e.value["mode"]
            if mode == "add" and name not in labels:
                labels.append(name)
            elif mode == "remove" and name in labels:
                labels.remove(name)
        elif e.op == OP_NOTE:
            notes.append(e.value)
    if labels:
        record["_labels"] = labels
    if notes:
        record["_notes"] = notes
    return record


# --- sidecar persistence ----------------------------------------------------


def overlay_path(dataset_path: str | Path) -> Path:
    """`data.jsonl` -> `data.overlay.jsonl`; other suffixes get appended."""
    p = Path(dataset_path)
    if p.suffix == ".jsonl":
        return p.with_suffix(".overlay.jsonl")
    return p.with_name(p.name + ".overlay.jsonl")


def load_overlay(dataset_path: str | Path, file_id: str | None = None) -> EditOverlay:
    """Read the sidecar journal if present, else an empty overlay.

    The sidecar belongs to one dataset file; passing file_id rebinds its
    entries to the id the dataset carries in this session.
    """
    side = overlay_path(dataset_path)
    if not side.exists():
        return EditOverlay()
    entries = []
    with side.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = EditEntry.from_json(json.loads(line))
            if file_id is not None and entry.file_id != file_id:
                entry = replace(entry, file_id=file_id)
            entries.append(entry)
    return EditOverlay(entries)


def append_to_sidecar(dataset_path: str | Path, entries: Iterable[EditEntry]) -> None:
    """Append entries to the sidecar journal (create it when missing)."""
    side = overlay_path(dataset_path)
    with side.open("a", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_json(), ensure_ascii=False) + "\n")
