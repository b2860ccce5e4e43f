"""Prompt templates: `{name}` placeholders, brace escaping, few-shot blocks.

Two modes. prompt_based sends the text verbatim (the caller owns the full
prompt, special tokens included); template_based substitutes record
fields into every placeholder and optionally prepends rendered few-shot
examples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..dataset.records import Record
from ..errors import MissingPlaceholder, TemplateError, UnbalancedBraces

PROMPT_BASED = "prompt_based"
TEMPLATE_BASED = "template_based"


@dataclass
class FewShotSpec:
    example_template: str
    examples: list[Record] = field(default_factory=list)
    separator: str = "\n\n"


@dataclass
class PromptTemplate:
    mode: str
    text: str
    few_shot: FewShotSpec | None = None

    def __post_init__(self) -> None:
        if self.mode not in (PROMPT_BASED, TEMPLATE_BASED):
            raise TemplateError(f"unknown template mode {self.mode!r}")


def _stringify(value: Any) -> str:
    # keep in sync with the browser preview: integral floats render like
    # ints, containers use compact JSON
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value.is_integer() and abs(value) < 1e16:
            return str(int(value))
        return repr(value)
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"))


def placeholder_names(text: str) -> list[str]:
    """Placeholders in order of first appearance; validates brace balance."""
    names: list[str] = []
    _render_text(text, None, names)
    return names


def _render_text(text: str, record: Record | None, sink: list[str] | None = None) -> str:
    """Substitute placeholders; record=None only scans (for validation)."""
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "{":
            if text[i + 1 : i + 2] == "{":
                out.append("{")
                i += 2
                continue
            end = text.find("}", i + 1)
            if end == -1:
                raise UnbalancedBraces(i)
            name = text[i + 1 : end]
            if not name.isidentifier():
                raise UnbalancedBraces(i)
            if sink is not None and name not in sink:
                sink.append(name)
            if record is not None:
                if name not in record:
                    raise MissingPlaceholder(name)
                out.append(_stringify(record[name]))
            i = end + 1
        elif ch == "}":
            if text[i + 1 : i + 2] == "}":
                out.append("}")
                i += 2
                continue
            raise UnbalancedBraces(i)
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def render_template(template: PromptTemplate, record: Record) -> str:
    """Fill a template_based template from one record.

    Raises MissingPlaceholder for unfillable names, UnbalancedBraces for
    stray or unterminated braces, TemplateError in prompt_based mode.
    """
    if template.mode != TEMPLATE_BASED:
        raise TemplateError("render_template requires template_based mode")
    parts: list[str] = []
    if template.few_shot is not None:
        spec = template.few_shot
        parts.extend(_render_text(spec.example_template, ex) for ex in spec.examples)
    parts.append(_render_text(template.text, record))
    separator = template.few_shot.separator if template.few_shot else ""
    return separator.join(parts)


def prompt_for(template: PromptTemplate, record: Record | None = None) -> str:
    """The final prompt string for either mode."""
    if template.mode == PROMPT_BASED:
        return template.text
    if record is None:
        raise TemplateError("template_based mode needs a record")
    return render_template(template, record)
