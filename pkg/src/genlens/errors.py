"""Exception hierarchy shared across genlens modules.

Two branches matter to callers: ValidationFailure subclasses signal bad
user input (malformed files, expressions, templates) and map to exit
code 1 / HTTP 4xx, everything else under GenlensError is a runtime
failure (exit code 2 / HTTP 5xx unless stated otherwise).
"""

from __future__ import annotations


class GenlensError(Exception):
    """Base class for all genlens errors."""


class ValidationFailure(GenlensError):
    """User-supplied input failed validation."""


# --- dataset-core ---------------------------------------------------------


class ParseError(ValidationFailure):
    """A dataset line is not a valid JSON object. Whole-file load fails."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LengthMismatch(ValidationFailure):
    def __init__(self, file_id: str, expected: int, actual: int):
        super().__init__(
            f"file {file_id!r} has {actual} rows, expected {expected}"
        )
        self.file_id = file_id
        self.expected = expected
        self.actual = actual


class KeyMismatch(ValidationFailure):
    def __init__(self, row_index: int, file_id: str, key: str):
        super().__init__(
            f"alignment key {key!r} disagrees at row {row_index} in file {file_id!r}"
        )
        self.row_index = row_index
        self.file_id = file_id
        self.key = key


class IndexOutOfRange(ValidationFailure):
    def __init__(self, row_index: int, row_count: int):
        super().__init__(f"row {row_index} out of range (0..{row_count - 1})")
        self.row_index = row_index
        self.row_count = row_count


class ReservedKeyCollision(ValidationFailure):
    """A base record already owns a reserved key such as `_labels`."""

    def __init__(self, key: str, row_index: int | None = None):
        where = "" if row_index is None else f" at row {row_index}"
        super().__init__(f"reserved key {key!r} already present in record{where}")
        self.key = key
        self.row_index = row_index


# --- stats-engine ---------------------------------------------------------


class UnknownField(ValidationFailure):
    def __init__(self, field: str, question_index: int | None = None):
        where = "" if question_index is None else f" for question {question_index}"
        super().__init__(f"field {field!r} absent from every record{where}")
        self.field = field
        self.question_index = question_index


# --- query-engine ---------------------------------------------------------


class FilterParseError(ValidationFailure):
    def __init__(self, message: str, position: int | None = None):
        at = "" if position is None else f" at position {position}"
        super().__init__(f"{message}{at}")
        self.position = position


class RegexError(ValidationFailure):
    def __init__(self, pattern: str, message: str):
        super().__init__(f"bad regex {pattern!r}: {message}")
        self.pattern = pattern


class UnknownStat(ValidationFailure):
    def __init__(self, name: str):
        super().__init__(f"stat {name!r} has not been computed")
        self.name = name


class TypeMismatch(ValidationFailure):
    def __init__(self, field: str, expected: str, row_index: int | None = None):
        where = "" if row_index is None else f" at row {row_index}"
        super().__init__(f"field {field!r} is not {expected}{where}")
        self.field = field


class InvalidNote(ValidationFailure):
    def __init__(self, message: str = "note must be a non-empty string"):
        super().__init__(message)


# --- script-host ----------------------------------------------------------


class ScriptSyntaxError(ValidationFailure):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NoExports(ValidationFailure):
    def __init__(self):
        super().__init__(
            "script must end with an export map, e.g. {\"name\": function}"
        )


class UnknownExport(ValidationFailure):
    def __init__(self, name: str):
        super().__init__(f"script does not export {name!r}")
        self.name = name


class ForbiddenCapability(GenlensError):
    """Script attempted I/O or another capability the sandbox withholds."""

    def __init__(self, capability: str):
        super().__init__(f"forbidden capability: {capability}")
        self.capability = capability


class SandboxTimeout(GenlensError):
    def __init__(self, wall_time_ms: int):
        super().__init__(f"script exceeded wall time limit of {wall_time_ms} ms")
        self.wall_time_ms = wall_time_ms


class MemoryExceeded(GenlensError):
    def __init__(self, memory_bytes: int):
        super().__init__(f"script exceeded memory limit of {memory_bytes} bytes")
        self.memory_bytes = memory_bytes


class ScriptRuntimeError(GenlensError):
    def __init__(self, message: str):
        super().__init__(message)


class ScriptError(GenlensError):
    """A custom statistic failed on one question; other questions still ran."""

    def __init__(self, question_index: int, message: str):
        super().__init__(f"question {question_index}: {message}")
        self.question_index = question_index
        self.message = message


# --- compare-engine -------------------------------------------------------


class PairingError(ValidationFailure):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


# --- inference-gateway ----------------------------------------------------


class TemplateError(ValidationFailure):
    pass


class MissingPlaceholder(TemplateError):
    def __init__(self, name: str):
        super().__init__(f"placeholder {{{name}}} has no value")
        self.name = name


class UnbalancedBraces(TemplateError):
    def __init__(self, position: int):
        super().__init__(f"unbalanced brace at position {position}")
        self.position = position


class AuthError(GenlensError):
    def __init__(self, status: int):
        super().__init__(f"endpoint rejected credentials (HTTP {status})")
        self.status = status


class EndpointError(GenlensError):
    def __init__(self, status: int | None, message: str, attempts: int = 1):
        detail = f"HTTP {status}" if status is not None else "no response"
        super().__init__(f"endpoint failure ({detail} after {attempts} attempt(s)): {message}")
        self.status = status
        self.attempts = attempts


class CompletionTimeout(GenlensError):
    def __init__(self, timeout_s: float, attempts: int):
        super().__init__(f"request timed out after {timeout_s}s x {attempts} attempt(s)")
        self.timeout_s = timeout_s
        self.attempts = attempts


class JobNotFound(ValidationFailure):
    def __init__(self, job_id: str):
        super().__init__(f"no job with id {job_id!r}")
        self.job_id = job_id
