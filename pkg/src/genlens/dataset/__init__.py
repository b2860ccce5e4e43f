"""Load, index, align, overlay-edit, and export JSONL generation datasets."""

from .export import export_jsonl
from .loader import load_dataset
from .overlay import (
    EditEntry,
    EditOverlay,
    append_to_sidecar,
    load_overlay,
    overlay_path,
    resolve_row,
)
from .records import DatasetFile, Record, RunGroup, align_runs

__all__ = [
    "DatasetFile",
    "EditEntry",
    "EditOverlay",
    "Record",
    "RunGroup",
    "align_runs",
    "append_to_sidecar",
    "export_jsonl",
    "load_dataset",
    "load_overlay",
    "overlay_path",
    "resolve_row",
]
