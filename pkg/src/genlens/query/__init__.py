"""Filter, sort, label, and batch-edit dataset views."""

from .edits import (
    BatchEditResult,
    annotate,
    batch_edit,
    delete_field,
    set_field,
    set_labels,
)
from .expressions import (
    EvalContext,
    Expr,
    SortKey,
    SortSpec,
    parse_filter,
    parse_sort,
)
from .views import View, apply_filter, apply_sort, identity_view

__all__ = [
    "BatchEditResult",
    "EvalContext",
    "Expr",
    "SortKey",
    "SortSpec",
    "View",
    "annotate",
    "apply_filter",
    "apply_sort",
    "batch_edit",
    "delete_field",
    "identity_view",
    "parse_filter",
    "parse_sort",
    "set_field",
    "set_labels",
]
