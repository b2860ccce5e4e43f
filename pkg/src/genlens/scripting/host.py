"""Script host: static vetting plus sandboxed invocation of user scripts.

Scripts follow the export-map convention: module-level functions, then a
trailing dict literal mapping export names to them. Loading never runs
user code in the host process; execution happens in a killable worker
subprocess with restricted builtins, an import whitelist, and wall-time
and memory limits.
"""

from __future__ import annotations

import ast
import multiprocessing
import threading
import uuid
from dataclasses import dataclass, field

from ..errors import (
    ForbiddenCapability,
    MemoryExceeded,
    NoExports,
    SandboxTimeout,
    ScriptRuntimeError,
    ScriptSyntaxError,
    UnknownExport,
)
from .worker import ALLOWED_IMPORTS, worker_main

# Example script shipped with the tool; counts the largest group of
# identical predicted answers across one question's runs.
EXAMPLE_PERSISTENCE_SCRIPT = """\
from collections import Counter
def persistence(datas):
    counter = Counter([data["predicted_answer"] for data in datas])
    return counter.most_common(1)[0][1]
{"persistence": persistence}
"""


@dataclass(frozen=True)
class SandboxLimits:
    wall_time_ms: int = 1000
    memory_bytes: int = 64 * 1024 * 1024


@dataclass
class Script:
    source: str
    exports: list[str]
    script_id: str = field(default_factory=lambda: f"sc-{uuid.uuid4().hex[:10]}")


def _vet_source(tree: ast.Module) -> None:
    """Reject imports outside the whitelist and private attribute access."""
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                root = alias.name.split(".")[0]
                if root not in ALLOWED_IMPORTS:
                    raise ForbiddenCapability(f"import {alias.name}")
        elif isinstance(node, ast.ImportFrom):
            root = (node.module or "").split(".")[0]
            if node.level != 0 or root not in ALLOWED_IMPORTS:
                raise ForbiddenCapability(f"import {node.module or '.'}")
        elif isinstance(node, ast.Attribute) and node.attr.startswith("_"):
            raise ForbiddenCapability(f"private attribute access .{node.attr}")


def load_script(source: str) -> Script:
    """Parse and vet a script; enumerate exports without executing it.

    Raises ScriptSyntaxError (with line), NoExports when the trailing
    export map is missing, ForbiddenCapability for disallowed imports.
    """
    try:
        tree = ast.parse(source)
    except SyntaxError as e:
        raise ScriptSyntaxError(e.lineno or 0, e.msg or "invalid syntax") from e
    if not tree.body:
        raise NoExports()
    last = tree.body[-1]
    if not (isinstance(last, ast.Expr) and isinstance(last.value, ast.Dict)):
        raise NoExports()
    exports = []
    for key in last.value.keys:
        if not (isinstance(key, ast.Constant) and isinstance(key.value, str)):
            raise NoExports()
        exports.append(key.value)
    if not exports:
        raise NoExports()
    _vet_source(tree)
    return Script(source=source, exports=exports)


class ScriptHost:
    """Owns one sandbox worker; serializes invocations, respawns on kill.

    Safe for concurrent callers (a lock serializes the worker pipe); a
    timed-out or crashed invocation never takes the host down.
    """

    def __init__(self, limits: SandboxLimits | None = None):
        self.limits = limits or SandboxLimits()
        self._ctx = multiprocessing.get_context("fork")
        self._lock = threading.Lock()
        self._process = None
        self._conn = None

    def _ensure_worker(self) -> None:
        if self._process is not None and self._process.is_alive():
            return
        parent_conn, child_conn = self._ctx.Pipe()
        process = self._ctx.Process(
            target=worker_main,
            args=(child_conn, self.limits.memory_bytes),
            daemon=True,
        )
        process.start()
        child_conn.close()
        self._process = process
        self._conn = parent_conn

    def _kill_worker(self) -> None:
        if self._process is not None:
            self._process.kill()
            self._process.join(timeout=5)
        if self._conn is not None:
            self._conn.close()
        self._process = None
        self._conn = None

    def invoke(self, script: Script, export: str, payload):
        """Run one export on a records-list or record payload.

        Returns a plain JSON value. Raises UnknownExport, SandboxTimeout,
        MemoryExceeded, ForbiddenCapability, or ScriptRuntimeError.
        """
        if export not in script.exports:
            raise UnknownExport(export)
        with self._lock:
            self._ensure_worker()
            try:
                self._conn.send((script.source, export, payload))
                if not self._conn.poll(self.limits.wall_time_ms / 1000.0):
                    self._kill_worker()
                    raise SandboxTimeout(self.limits.wall_time_ms)
                reply = self._conn.recv()
            except (EOFError, OSError, BrokenPipeError) as e:
                self._kill_worker()
                raise ScriptRuntimeError(f"sandbox worker died: {e}") from e
        if reply[0] == "ok":
            return reply[1]
        _, kind, message = reply
        if kind == "forbidden":
            raise ForbiddenCapability(message)
        if kind == "memory":
            raise MemoryExceeded(self.limits.memory_bytes)
        raise ScriptRuntimeError(message)

    def close(self) -> None:
        with self._lock:
            if self._process is not None and self._process.is_alive():
                try:
                    self._conn.send(None)
                    self._process.join(timeout=1)
                except (OSError, BrokenPipeError):
                    pass
            self._kill_worker()

    def __enter__(self) -> "ScriptHost":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
