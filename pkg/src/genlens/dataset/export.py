"""Export dataset views back to JSONL, byte-exact or overlay-resolved."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .overlay import EditOverlay, resolve_row
from .records import DatasetFile


def export_jsonl(
    rows: Iterable[tuple[DatasetFile, int]],
    overlay: EditOverlay | None,
    dest: str | Path,
    mode: str = "raw",
) -> int:
    """Write the given (file, row) view to dest; returns rows written.

    mode="raw" emits original line bytes verbatim (terminators included),
    so a full-file identity view round-trips byte-exactly. mode="resolved"
    serializes overlay-applied records, original key order preserved for
    untouched keys, reserved keys last, LF line endings.
    """
    if mode not in ("raw", "resolved"):
        raise ValueError(f"unknown export mode {mode!r}")
    dest = Path(dest)
    count = 0
    rows = list(rows)
    with dest.open("wb") as fh:
        for pos, (dataset, row_index) in enumerate(rows):
            if mode == "raw":
                raw = dataset.raw_line(row_index)
                # a terminator-less line may only end the export
                if not raw.endswith(b"\n") and pos != len(rows) - 1:
                    raw += b"\n"
                fh.write(raw)
            else:
                record = resolve_row(dataset, row_index, overlay)
                fh.write(json.dumps(record, ensure_ascii=False).encode("utf-8"))
                fh.write(b"\n")
            count += 1
    return count
