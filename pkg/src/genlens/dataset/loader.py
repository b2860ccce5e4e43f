"""Streaming JSONL loader with byte-offset indexing and eager validation.

Every line is either a parsed Record or a positioned ParseError; a single
malformed line fails the whole load (partial datasets are worse than no
dataset). Parsed objects are discarded after validation to keep memory
flat; DatasetFile re-parses lazily on access.
"""

from __future__ import annotations

import hashlib
import json
import mmap
from pathlib import Path
from typing import Any

from ..errors import ParseError
from .records import DatasetFile


def default_file_id(path: str | Path) -> str:
    """Stable id derived from the resolved path, so reloads agree."""
    digest = hashlib.sha1(str(Path(path).resolve()).encode("utf-8")).hexdigest()
    return f"ds-{digest[:10]}"


def _line_spans(data: bytes | mmap.mmap) -> list[tuple[int, int]]:
    """(start, length) of each line, terminator included."""
    spans = []
    start = 0
    n = len(data)
    while start < n:
        nl = data.find(b"\n", start)
        end = n if nl == -1 else nl + 1
        spans.append((start, end - start))
        start = end
    return spans


def load_dataset(
    path: str | Path,
    file_id: str | None = None,
    metadata: dict[str, Any] | None = None,
) -> DatasetFile:
    """Load a JSONL file into a DatasetFile.

    One Record per non-empty line; blank lines are skipped. Raises
    ParseError (1-based line number) when a line is not a JSON object,
    OSError when the path is unreadable.
    """
    path = Path(path)
    with path.open("rb") as fh:
        try:
            data: bytes | mmap.mmap = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
        except ValueError:  # empty file cannot be mmapped
            data = b""

    offsets: list[tuple[int, int]] = []
    for line_no, (start, length) in enumerate(_line_spans(data), start=1):
        line = bytes(data[start : start + length]).rstrip(b"\r\n")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(line_no, e.msg) from e
        if not isinstance(obj, dict):
            raise ParseError(line_no, "line is valid JSON but not an object")
        offsets.append((start, length))

    return DatasetFile(
        id=file_id or default_file_id(path),
        source_path=path,
        offsets=offsets,
        data=data,
        metadata=metadata,
    )
