"""Answer normalization and grading.

Normalization defaults suit grade-school math answers: whitespace trim,
one layer of surrounding dollar signs, thousands separators dropped in
pure numerics, and numeric canonicalization ("71.0" -> "71"). Pass
normalize=False for raw-value identity (Counter-style counting).
"""

from __future__ import annotations

import json
import math
import re
from typing import Any, Union

CORRECT = "correct"
INCORRECT = "incorrect"
NO_ANSWER = "no_answer"


class _Empty:
    """Marker for a missing/blank answer. Singleton, falsy."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"

    def __bool__(self) -> bool:
        return False


EMPTY = _Empty()

Normalized = Union[str, _Empty]

# 1,234 / 12,345.67 style; separators only meaningful in pure numerics
_THOUSANDS = re.compile(r"^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$")
_INT = re.compile(r"^[+-]?\d+$")
_FLOAT = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")


def _canonical_number(text: str) -> str | None:
    """Canonical string for a numeric literal, None when not numeric."""
    if _INT.match(text):
        return str(int(text))
    if _FLOAT.match(text):
        value = float(text)
        if math.isfinite(value) and value.is_integer() and abs(value) < 1e16:
            return str(int(value))
        return repr(value)
    return None


def normalize_answer(value: Any, normalize: bool = True) -> Normalized:
    """Total function from any JSON value to a normalized string or EMPTY."""
    if value is None or isinstance(value, _Empty):
        return EMPTY
    if not normalize:
        if isinstance(value, str):
            return json.dumps(value, ensure_ascii=False)
        return json.dumps(value, ensure_ascii=False, sort_keys=True)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isfinite(value) and value.is_integer() and abs(value) < 1e16:
            return str(int(value))
        return repr(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            return EMPTY
        if text.startswith("$"):
            text = text[1:]
        if text.endswith("$") and text:
            text = text[:-1]
        text = text.strip()
        if not text:
            return EMPTY
        if _THOUSANDS.match(text):
            text = text.replace(",", "")
        canonical = _canonical_number(text)
        return canonical if canonical is not None else text
    # lists/objects: stable JSON encoding
    return json.dumps(value, ensure_ascii=False, sort_keys=True)


def _as_number(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def grade(predicted: Any, expected: Any, rel_tol: float = 1e-9) -> str:
    """correct | incorrect | no_answer for a predicted/expected pair."""
    p = normalize_answer(predicted)
    if p is EMPTY:
        return NO_ANSWER
    e = normalize_answer(expected)
    if p == e:
        return CORRECT
    if not isinstance(e, _Empty):
        pn, en = _as_number(p), _as_number(e)
        if pn is not None and en is not None and math.isclose(pn, en, rel_tol=rel_tol, abs_tol=0.0):
            return CORRECT
    return INCORRECT
