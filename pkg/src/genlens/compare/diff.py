"""Word- and line-level text diffing with reconstructible spans.

The span sequence always satisfies: concatenating {equal, delete} spans
reproduces the left text exactly, {equal, insert} the right text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from difflib import SequenceMatcher

EQUAL = "equal"
INSERT = "insert"
DELETE = "delete"

# non-space run with its trailing whitespace attached; leading whitespace
# (no preceding token) stands alone so concatenation stays total
_WORD_TOKEN = re.compile(r"\S+\s*|\s+")


@dataclass(frozen=True)
class DiffSpan:
    kind: str  # equal | insert | delete
    text: str

    def to_json(self) -> dict[str, str]:
        return {"kind": self.kind, "text": self.text}


def _tokenize(text: str, granularity: str) -> list[str]:
    if granularity == "word":
        return _WORD_TOKEN.findall(text)
    if granularity == "line":
        return text.splitlines(keepends=True)
    raise ValueError(f"unknown granularity {granularity!r}")


def diff_texts(a: str, b: str, granularity: str = "word") -> list[DiffSpan]:
    """LCS-based span sequence; spans are maximal (no same-kind neighbors)."""
    tokens_a = _tokenize(a, granularity)
    tokens_b = _tokenize(b, granularity)
    matcher = SequenceMatcher(None, tokens_a, tokens_b, autojunk=False)
    spans: list[DiffSpan] = []

    def push(kind: str, text: str) -> None:
        if not text:
            return
        if spans and spans[-1].kind == kind:
            spans[-1] = DiffSpan(kind, spans[-1].text + text)
        else:
            spans.append(DiffSpan(kind, text))

    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            push(EQUAL, "".join(tokens_a[i1:i2]))
        elif tag == "delete":
            push(DELETE, "".join(tokens_a[i1:i2]))
        elif tag == "insert":
            push(INSERT, "".join(tokens_b[j1:j2]))
        else:  # replace
            left = "".join(tokens_a[i1:i2])
            right = "".join(tokens_b[j1:j2])
            if granularity == "word":
                # peel the character-level common prefix/suffix so edits
                # inside a token ($21. -> $30.) isolate the changed part
                prefix, left, right, suffix = _trim_common(left, right)
                push(EQUAL, prefix)
                push(DELETE, left)
                push(INSERT, right)
                push(EQUAL, suffix)
            else:
                push(DELETE, left)
                push(INSERT, right)
    return spans


def _trim_common(a: str, b: str) -> tuple[str, str, str, str]:
    p = 0
    limit = min(len(a), len(b))
    while p < limit and a[p] == b[p]:
        p += 1
    s = 0
    limit -= p
    while s < limit and a[len(a) - 1 - s] == b[len(b) - 1 - s]:
        s += 1
    return a[:p], a[p : len(a) - s], b[p : len(b) - s], a[len(a) - s :] if s else ""


def reconstruct(spans: list[DiffSpan], side: str) -> str:
    """Rebuild one side from spans; side is "a" (equal+delete) or "b"."""
    keep = DELETE if side == "a" else INSERT
    return "".join(s.text for s in spans if s.kind in (EQUAL, keep))
