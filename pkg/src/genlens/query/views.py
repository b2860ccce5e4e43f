"""Views: filtered/sorted row index subsets over a file or run group.

Group bases evaluate field references against the first file's resolved
record; stat references read the per-question report columns. All view
operations are read-only with respect to dataset bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from ..dataset.overlay import EditOverlay, resolve_row
from ..dataset.records import DatasetFile, Record, RunGroup
from ..errors import UnknownStat
from ..stats.engine import StatReport
from .expressions import (
    MISSING,
    EvalContext,
    Expr,
    SortSpec,
    parse_filter,
    parse_sort,
)

Base = Union[DatasetFile, RunGroup]


@dataclass
class View:
    base: Base
    row_indices: list[int]
    provenance: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.row_indices)


def base_length(base: Base) -> int:
    return base.question_count if isinstance(base, RunGroup) else len(base)


def primary_file(base: Base) -> DatasetFile:
    return base.files[0] if isinstance(base, RunGroup) else base


def base_record(base: Base, index: int, overlay: EditOverlay | None) -> Record:
    return resolve_row(primary_file(base), index, overlay)


def identity_view(base: Base) -> View:
    return View(base=base, row_indices=list(range(base_length(base))))


def _stat_lookup(stats: dict[str, StatReport] | None, index: int):
    def lookup(name: str) -> Any:
        if stats is None or name not in stats:
            return MISSING
        value = stats[name].per_question[index]
        return MISSING if value is None else value

    return lookup


def _check_stat_refs(names: set[str], stats: dict[str, StatReport] | None) -> None:
    available = set(stats or ())
    for name in sorted(names):
        if name not in available:
            raise UnknownStat(name)


def apply_filter(
    base: Base,
    expr: Expr | str,
    stats: dict[str, StatReport] | None = None,
    overlay: EditOverlay | None = None,
) -> View:
    """Rows where the expression is true on the resolved record."""
    if isinstance(expr, str):
        source, expr = expr, parse_filter(expr)
    else:
        source = f"<{type(expr).__name__}>"
    _check_stat_refs(expr.stat_refs(), stats)
    rows = []
    for i in range(base_length(base)):
        ctx = EvalContext(base_record(base, i, overlay), _stat_lookup(stats, i))
        if expr.truthy(ctx):
            rows.append(i)
    return View(base=base, row_indices=rows, provenance=[f"filter:{source}"])


_RANK_NUMBER, _RANK_STRING, _RANK_OTHER, _RANK_MISSING = 0, 1, 2, 3


def _sort_value(value: Any) -> tuple:
    if value is MISSING or value is None:
        return (_RANK_MISSING, 0)
    if isinstance(value, bool):
        return (_RANK_NUMBER, int(value))
    if isinstance(value, (int, float)):
        return (_RANK_NUMBER, value)
    if isinstance(value, str):
        return (_RANK_STRING, value)
    return (_RANK_OTHER, repr(value))


def apply_sort(
    view: View,
    spec: SortSpec | str,
    stats: dict[str, StatReport] | None = None,
    overlay: EditOverlay | None = None,
) -> View:
    """Stable multi-key reorder of the view's row indices."""
    if isinstance(spec, str):
        source, spec = spec, parse_sort(spec)
    else:
        source = ",".join(f"{k.source}:{k.direction}" for k in spec.keys)
    _check_stat_refs(spec.stat_refs(), stats)
    rows = list(view.row_indices)
    # right-to-left stable passes implement multi-key ordering
    for key in reversed(spec.keys):
        if key.is_stat:
            report = stats[key.stat_name]

            def value_of(i: int, report=report) -> Any:
                v = report.per_question[i]
                return MISSING if v is None else v

        else:

            def value_of(i: int, name=key.source) -> Any:
                return base_record(view.base, i, overlay).get(name, MISSING)

        rows.sort(key=lambda i: _sort_value(value_of(i)), reverse=key.direction == "desc")
    return View(
        base=view.base,
        row_indices=rows,
        provenance=view.provenance + [f"sort:{source}"],
    )
