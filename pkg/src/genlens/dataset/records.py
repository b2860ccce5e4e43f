"""Dataset containers: line-indexed JSONL files and aligned run groups.

A DatasetFile never re-reads or mutates its source; raw line bytes
(including the original terminator) are addressed through a byte-offset
index built at load time, and record bodies are parsed lazily on first
access and cached.
"""

from __future__ import annotations

import json
import mmap
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from ..errors import IndexOutOfRange, KeyMismatch, LengthMismatch

Record = dict[str, Any]

_MISSING = object()


class DatasetFile:
    """One JSONL file: ordered records plus their original bytes.

    Immutable after construction and safe to share across readers.
    """

    def __init__(
        self,
        id: str,
        source_path: Path,
        offsets: list[tuple[int, int]],
        data: bytes | mmap.mmap,
        metadata: dict[str, Any] | None = None,
    ):
        self.id = id
        self.source_path = source_path
        self.metadata = metadata or {}
        self._offsets = offsets
        self._data = data
        self._cache: dict[int, Record] = {}

    def __len__(self) -> int:
        return len(self._offsets)

    def __repr__(self) -> str:
        return f"DatasetFile(id={self.id!r}, rows={len(self)}, path={str(self.source_path)!r})"

    def _check(self, row_index: int) -> None:
        if not 0 <= row_index < len(self._offsets):
            raise IndexOutOfRange(row_index, len(self._offsets))

    def raw_line(self, row_index: int) -> bytes:
        """Original bytes of one line, terminator included when present."""
        self._check(row_index)
        start, length = self._offsets[row_index]
        return bytes(self._data[start : start + length])

    def record(self, row_index: int) -> Record:
        """Parsed record for one row. Cached; treat the result as read-only."""
        self._check(row_index)
        cached = self._cache.get(row_index)
        if cached is None:
            # strip the terminator before parsing; validated at load time
            cached = json.loads(self.raw_line(row_index).rstrip(b"\r\n"))
            self._cache[row_index] = cached
        return cached

    def records(self) -> Iterator[Record]:
        for i in range(len(self)):
            yield self.record(i)


@dataclass
class RunGroup:
    """Aligned homogeneous generation files, one per seed/run."""

    files: list[DatasetFile]
    alignment_key: str | None = None
    question_count: int = 0

    def __post_init__(self) -> None:
        if not self.files:
            raise ValueError("a RunGroup needs at least one file")
        expected = len(self.files[0])
        for f in self.files:
            if len(f) != expected:
                raise LengthMismatch(f.id, expected, len(f))
        if self.alignment_key is not None:
            key = self.alignment_key
            first = self.files[0]
            for i in range(expected):
                want = first.record(i).get(key, _MISSING)
                for f in self.files[1:]:
                    if f.record(i).get(key, _MISSING) != want:
                        raise KeyMismatch(i, f.id, key)
        self.question_count = expected

    def records_for_question(self, question_index: int) -> list[Record]:
        """The cross-run record list for one question, in file order."""
        return [f.record(question_index) for f in self.files]

    @property
    def file_ids(self) -> list[str]:
        return [f.id for f in self.files]


def align_runs(
    files: list[DatasetFile], alignment_key: str | None = None
) -> RunGroup:
    """Group homogeneous run files, validating row counts and key agreement.

    Raises LengthMismatch or KeyMismatch; alignment is by row index, the
    optional key only verifies that files were not shuffled.
    """
    group = RunGroup(files=list(files), alignment_key=alignment_key)
    return group
