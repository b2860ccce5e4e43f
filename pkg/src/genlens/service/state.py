"""In-memory session state: registered datasets, groups, scripts, jobs.

Ids are opaque and stable for the server lifetime. Per-dataset overlay
writes are serialized through one lock and mirrored to the sidecar file,
so edits survive restarts while source files stay immutable.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..compare.comparison import ComparisonSet
from ..dataset.loader import load_dataset
from ..dataset.overlay import EditOverlay, append_to_sidecar, load_overlay
from ..dataset.records import DatasetFile, RunGroup, align_runs
from ..errors import ValidationFailure
from ..inference.client import InferenceClient
from ..inference.config import EndpointConfig
from ..inference.sweep import JobRegistry
from ..scripting.host import SandboxLimits, Script, ScriptHost
from ..stats.engine import StatReport, builtin_stats


class UnknownId(ValidationFailure):
    def __init__(self, kind: str, id: str):
        super().__init__(f"unknown {kind} id {id!r}")
        self.kind = kind
        self.id = id


@dataclass
class DatasetEntry:
    file: DatasetFile
    overlay: EditOverlay
    source_path: Path
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class GroupEntry:
    group: RunGroup
    dataset_ids: list[str]
    custom_reports: dict[str, StatReport] = field(default_factory=dict)
    builtin_cache: dict[tuple, dict[str, StatReport]] = field(default_factory=dict)


@dataclass
class ComparisonEntry:
    cmp: ComparisonSet
    expected_field: str
    answer_field: str
    generation_field: str
    exact_match: bool


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:10]}"


class SessionState:
    def __init__(
        self,
        data_root: str | Path = ".",
        endpoint: EndpointConfig | None = None,
        limits: SandboxLimits | None = None,
    ):
        self.data_root = Path(data_root).resolve()
        self.endpoint = endpoint
        self.datasets: dict[str, DatasetEntry] = {}
        self.groups: dict[str, GroupEntry] = {}
        self.comparisons: dict[str, ComparisonEntry] = {}
        self.scripts: dict[str, Script] = {}
        self.host = ScriptHost(limits)
        self.jobs = JobRegistry()

    # --- paths ---------------------------------------------------------

    def resolve_path(self, raw: str, must_exist: bool = True) -> Path:
        """Resolve a client-supplied path inside the allow-listed root."""
        path = (self.data_root / raw).resolve() if not Path(raw).is_absolute() else Path(raw).resolve()
        if not path.is_relative_to(self.data_root):
            raise ValidationFailure(f"path {raw!r} is outside the data root")
        if must_exist and not path.exists():
            raise ValidationFailure(f"path {raw!r} does not exist")
        return path

    # --- datasets ------------------------------------------------------

    def register_dataset(self, raw_path: str, dataset_id: str | None = None) -> DatasetEntry:
        path = self.resolve_path(raw_path)
        dataset_id = dataset_id or _new_id("ds")
        if dataset_id in self.datasets:
            raise ValidationFailure(f"dataset id {dataset_id!r} already registered")
        file = load_dataset(path, file_id=dataset_id)
        entry = DatasetEntry(
            file=file, overlay=load_overlay(path, dataset_id), source_path=path
        )
        self.datasets[dataset_id] = entry
        return entry

    def get_dataset(self, dataset_id: str) -> DatasetEntry:
        entry = self.datasets.get(dataset_id)
        if entry is None:
            raise UnknownId("dataset", dataset_id)
        return entry

    def persist_new_entries(self, entry: DatasetEntry, start: int) -> None:
        append_to_sidecar(entry.source_path, entry.overlay.entries[start:])

    # --- groups --------------------------------------------------------

    def create_group(self, dataset_ids: list[str], alignment_key: str | None) -> str:
        files = [self.get_dataset(d).file for d in dataset_ids]
        group = align_runs(files, alignment_key)
        group_id = _new_id("grp")
        self.groups[group_id] = GroupEntry(group=group, dataset_ids=list(dataset_ids))
        return group_id

    def get_group(self, group_id: str) -> GroupEntry:
        entry = self.groups.get(group_id)
        if entry is None:
            raise UnknownId("group", group_id)
        return entry

    def group_overlay(self, entry: GroupEntry) -> EditOverlay:
        """Combined journal across the group's datasets (ids are disjoint)."""
        merged = EditOverlay()
        for dataset_id in entry.dataset_ids:
            merged.entries.extend(self.get_dataset(dataset_id).overlay.entries)
        return merged

    def group_reports(
        self, group_id: str, expected_field: str = "expected_answer"
    ) -> dict[str, StatReport]:
        """Builtin reports plus registered custom reports, cache-aware."""
        entry = self.get_group(group_id)
        overlay = self.group_overlay(entry)
        cache_key = (expected_field, len(overlay.entries))
        if cache_key not in entry.builtin_cache:
            entry.builtin_cache.clear()
            entry.builtin_cache[cache_key] = builtin_stats(
                entry.group, expected_field=expected_field, overlay=overlay
            )
        reports = dict(entry.builtin_cache[cache_key])
        reports.update(entry.custom_reports)
        return reports

    # --- scripts -------------------------------------------------------

    def register_script(self, script: Script) -> str:
        self.scripts[script.script_id] = script
        return script.script_id

    def get_script(self, script_id: str) -> Script:
        script = self.scripts.get(script_id)
        if script is None:
            raise UnknownId("script", script_id)
        return script

    # --- comparisons ---------------------------------------------------

    def create_comparison(self, entry: ComparisonEntry) -> str:
        comparison_id = _new_id("cmp")
        self.comparisons[comparison_id] = entry
        return comparison_id

    def get_comparison(self, comparison_id: str) -> ComparisonEntry:
        entry = self.comparisons.get(comparison_id)
        if entry is None:
            raise UnknownId("comparison", comparison_id)
        return entry

    # --- inference -----------------------------------------------------

    def client_for(self, override: dict[str, Any] | None = None) -> InferenceClient:
        if override:
            fields = {k: v for k, v in override.items() if v is not None}
            config = EndpointConfig(**fields)
        elif self.endpoint is not None:
            config = self.endpoint
        else:
            raise ValidationFailure(
                "no inference endpoint configured; pass one in the request "
                "or start the server with --endpoint"
            )
        return InferenceClient(config)

    def close(self) -> None:
        self.host.close()
