"""Filter expression grammar and sort specs.

Textual form shared by CLI flags and API query parameters; see
docs/query-language.md. Evaluation is total: a missing field makes any
comparison false and never raises.
"""

from __future__ import annotations

import ast as python_ast
import re
from dataclasses import dataclass
from typing import Any, Callable

from ..errors import FilterParseError, RegexError

MISSING = object()

_TOKEN = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<number>-?\d+(\.\d+)?([eE][+-]?\d+)?)
    | (?P<string>"(?:\\.|[^"\\])*"|'(?:\\.|[^'\\])*')
    | (?P<op>==|!=|<=|>=|<|>)
    | (?P<lparen>\()
    | (?P<rparen>\))
    | (?P<comma>,)
    | (?P<dot>\.)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and", "or", "not", "true", "false", "null"}
_FUNCTIONS = {"contains", "matches", "count"}

_ORDERED: dict[str, Callable[[Any, Any], bool]] = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise FilterParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    return tokens


class EvalContext:
    """Row-level lookups for one evaluation: record fields and stat columns."""

    def __init__(self, record: dict[str, Any], stat_lookup: Callable[[str], Any] | None = None):
        self.record = record
        self._stat_lookup = stat_lookup

    def field(self, name: str) -> Any:
        return self.record.get(name, MISSING)

    def stat(self, name: str) -> Any:
        if self._stat_lookup is None:
            return MISSING
        return self._stat_lookup(name)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class Expr:
    def evaluate(self, ctx: EvalContext) -> Any:
        raise NotImplementedError

    def stat_refs(self) -> set[str]:
        return set()

    def truthy(self, ctx: EvalContext) -> bool:
        value = self.evaluate(ctx)
        return False if value is MISSING else bool(value)


@dataclass
class Literal(Expr):
    value: Any

    def evaluate(self, ctx: EvalContext) -> Any:
        return self.value


@dataclass
class FieldRef(Expr):
    name: str

    def evaluate(self, ctx: EvalContext) -> Any:
        return ctx.field(self.name)


@dataclass
class StatRef(Expr):
    name: str

    def evaluate(self, ctx: EvalContext) -> Any:
        return ctx.stat(self.name)

    def stat_refs(self) -> set[str]:
        return {self.name}


@dataclass
class Compare(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, ctx: EvalContext) -> bool:
        lhs = self.left.evaluate(ctx)
        rhs = self.right.evaluate(ctx)
        if lhs is MISSING or rhs is MISSING:
            return False
        if self.op == "==":
            return lhs == rhs
        if self.op == "!=":
            return lhs != rhs
        if _is_number(lhs) and _is_number(rhs):
            return _ORDERED[self.op](lhs, rhs)
        if isinstance(lhs, str) and isinstance(rhs, str):
            return _ORDERED[self.op](lhs, rhs)
        return False

    def stat_refs(self) -> set[str]:
        return self.left.stat_refs() | self.right.stat_refs()


@dataclass
class BoolOp(Expr):
    op: str  # and | or
    parts: list[Expr]

    def evaluate(self, ctx: EvalContext) -> bool:
        if self.op == "and":
            return all(p.truthy(ctx) for p in self.parts)
        return any(p.truthy(ctx) for p in self.parts)

    def stat_refs(self) -> set[str]:
        refs: set[str] = set()
        for p in self.parts:
            refs |= p.stat_refs()
        return refs


@dataclass
class NotOp(Expr):
    inner: Expr

    def evaluate(self, ctx: EvalContext) -> bool:
        return not self.inner.truthy(ctx)

    def stat_refs(self) -> set[str]:
        return self.inner.stat_refs()


@dataclass
class StringFunc(Expr):
    """contains/count (substring) and matches (compiled regex)."""

    name: str
    target: Expr
    needle: str
    pattern: re.Pattern | None = None

    def evaluate(self, ctx: EvalContext) -> Any:
        value = self.target.evaluate(ctx)
        if isinstance(value, list):
            # list fields (e.g. _labels): membership and occurrence count
            if self.name == "count":
                return sum(1 for item in value if item == self.needle)
            if self.name == "contains":
                return self.needle in value
            return any(
                isinstance(item, str) and self.pattern.search(item) for item in value
            )
        if not isinstance(value, str):
            return 0 if self.name == "count" else False
        if self.name == "count":
            return value.count(self.needle) if self.needle else 0
        if self.name == "contains":
            return self.needle in value
        return self.pattern.search(value) is not None

    def stat_refs(self) -> set[str]:
        return self.target.stat_refs()


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.index = 0

    def _peek(self) -> Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _next(self) -> Token:
        tok = self._peek()
        if tok is None:
            raise FilterParseError("unexpected end of expression", len(self.source))
        self.index += 1
        return tok

    def _expect(self, kind: str) -> Token:
        tok = self._peek()
        if tok is None or tok.kind != kind:
            pos = tok.pos if tok else len(self.source)
            raise FilterParseError(f"expected {kind}", pos)
        return self._next()

    def parse(self) -> Expr:
        expr = self._or()
        tok = self._peek()
        if tok is not None:
            raise FilterParseError(f"unexpected token {tok.text!r}", tok.pos)
        return expr

    def _or(self) -> Expr:
        parts = [self._and()]
        while self._at_keyword("or"):
            self._next()
            parts.append(self._and())
        return parts[0] if len(parts) == 1 else BoolOp("or", parts)

    def _and(self) -> Expr:
        parts = [self._unary()]
        while self._at_keyword("and"):
            self._next()
            parts.append(self._unary())
        return parts[0] if len(parts) == 1 else BoolOp("and", parts)

    def _at_keyword(self, word: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == "ident" and tok.text == word

    def _unary(self) -> Expr:
        if self._at_keyword("not"):
            self._next()
            return NotOp(self._unary())
        return self._comparison()

    def _comparison(self) -> Expr:
        left = self._primary()
        tok = self._peek()
        if tok is not None and tok.kind == "op":
            self._next()
            right = self._primary()
            return Compare(tok.text, left, right)
        return left

    def _primary(self) -> Expr:
        tok = self._next()
        if tok.kind == "number":
            text = tok.text
            return Literal(int(text) if re.fullmatch(r"-?\d+", text) else float(text))
        if tok.kind == "string":
            return Literal(python_ast.literal_eval(tok.text))
        if tok.kind == "lparen":
            inner = self._or()
            self._expect("rparen")
            return inner
        if tok.kind == "ident":
            if tok.text == "true":
                return Literal(True)
            if tok.text == "false":
                return Literal(False)
            if tok.text == "null":
                return Literal(None)
            if tok.text in ("and", "or", "not"):
                raise FilterParseError(f"unexpected keyword {tok.text!r}", tok.pos)
            if tok.text == "stat" and self._peek() and self._peek().kind == "dot":
                self._next()
                name = self._expect("ident")
                return StatRef(name.text)
            if tok.text in _FUNCTIONS and self._peek() and self._peek().kind == "lparen":
                return self._function(tok)
            nxt = self._peek()
            if nxt is not None and nxt.kind == "lparen":
                raise FilterParseError(f"unknown function {tok.text!r}", tok.pos)
            return FieldRef(tok.text)
        raise FilterParseError(f"unexpected token {tok.text!r}", tok.pos)

    def _function(self, name_tok: Token) -> Expr:
        self._expect("lparen")
        target = self._primary()
        self._expect("comma")
        arg = self._next()
        if arg.kind != "string":
            raise FilterParseError(
                f"{name_tok.text}() needs a string literal argument", arg.pos
            )
        needle = python_ast.literal_eval(arg.text)
        self._expect("rparen")
        pattern = None
        if name_tok.text == "matches":
            try:
                pattern = re.compile(needle)
            except re.error as e:
                raise RegexError(needle, str(e)) from e
        return StringFunc(name_tok.text, target, needle, pattern)


def parse_filter(source: str) -> Expr:
    """Parse the textual filter form; raises FilterParseError/RegexError."""
    expr = _Parser(source).parse()
    return expr


# --- sort specs -------------------------------------------------------------


@dataclass(frozen=True)
class SortKey:
    source: str  # field name or "stat.<name>"
    direction: str = "asc"

    @property
    def is_stat(self) -> bool:
        return self.source.startswith("stat.")

    @property
    def stat_name(self) -> str:
        return self.source[len("stat.") :]


@dataclass(frozen=True)
class SortSpec:
    keys: tuple[SortKey, ...]

    def stat_refs(self) -> set[str]:
        return {k.stat_name for k in self.keys if k.is_stat}


_SORT_KEY = re.compile(
    r"^(?P<source>(stat\.)?[A-Za-z_][A-Za-z0-9_]*)(\s*:\s*(?P<dir>asc|desc))?$"
)


def parse_sort(source: str) -> SortSpec:
    """Parse `key[:asc|desc](,key[:asc|desc])*` into a SortSpec."""
    keys = []
    for chunk in source.split(","):
        chunk = chunk.strip()
        if not chunk:
            raise FilterParseError("empty sort key")
        m = _SORT_KEY.match(chunk)
        if m is None:
            raise FilterParseError(f"bad sort key {chunk!r}")
        keys.append(SortKey(m.group("source"), m.group("dir") or "asc"))
    if not keys:
        raise FilterParseError("empty sort spec")
    return SortSpec(tuple(keys))
