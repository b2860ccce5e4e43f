"""Sandbox worker process: executes user scripts under restricted builtins.

Runs as a child process; the host kills it on wall-time overrun and
respawns. Address-space growth is capped with RLIMIT_AS relative to the
baseline measured at startup. The module body is re-executed for every
invocation, so no state leaks between calls.
"""

from __future__ import annotations

import ast
import json
import resource


ALLOWED_IMPORTS = frozenset(
    {"collections", "math", "itertools", "functools", "re", "statistics", "string"}
)


class _Forbidden(Exception):
    pass


def _stub(name: str):
    def forbidden(*args, **kwargs):
        raise _Forbidden(name)

    return forbidden


def _guarded_import(name, globals=None, locals=None, fromlist=(), level=0):
    root = name.split(".")[0]
    if level != 0 or root not in ALLOWED_IMPORTS:
        raise _Forbidden(f"import {name}")
    return __import__(name, globals, locals, fromlist, level)


_SAFE_NAMES = (
    "abs", "all", "any", "bool", "bytes", "callable", "chr", "complex",
    "dict", "divmod", "enumerate", "filter", "float", "frozenset", "hash",
    "int", "isinstance", "issubclass", "iter", "len", "list", "map", "max",
    "min", "next", "ord", "pow", "range", "repr", "reversed", "round",
    "set", "slice", "sorted", "str", "sum", "tuple", "type", "zip",
    "ArithmeticError", "AssertionError", "AttributeError", "BaseException",
    "Exception", "IndexError", "KeyError", "LookupError", "NameError",
    "NotImplementedError", "OverflowError", "RecursionError", "RuntimeError",
    "StopIteration", "TypeError", "ValueError", "ZeroDivisionError",
)

_FORBIDDEN_NAMES = (
    "open", "input", "print", "eval", "exec", "compile", "globals",
    "locals", "vars", "getattr", "setattr", "delattr", "dir",
    "breakpoint", "exit", "quit", "help",
)

_real_builtins = __builtins__ if isinstance(__builtins__, dict) else vars(__builtins__)

SAFE_BUILTINS: dict = {name: _real_builtins[name] for name in _SAFE_NAMES}
SAFE_BUILTINS.update({name: _stub(name) for name in _FORBIDDEN_NAMES})
SAFE_BUILTINS["__import__"] = _guarded_import
SAFE_BUILTINS["__build_class__"] = _real_builtins["__build_class__"]
SAFE_BUILTINS["None"] = None
SAFE_BUILTINS["True"] = True
SAFE_BUILTINS["False"] = False


def _compile_script(source: str):
    """Compile with the trailing export map bound to __exports__."""
    tree = ast.parse(source)
    last = tree.body[-1]
    assign = ast.Assign(
        targets=[ast.Name(id="__exports__", ctx=ast.Store())], value=last.value
    )
    tree.body[-1] = assign
    ast.fix_missing_locations(tree)
    return compile(tree, "<script>", "exec")


def _apply_memory_limit(memory_bytes: int) -> None:
    """Cap address-space growth at baseline + memory_bytes."""
    page_size = resource.getpagesize()
    with open("/proc/self/statm") as fh:
        baseline = int(fh.read().split()[0]) * page_size
    limit = baseline + memory_bytes
    resource.setrlimit(resource.RLIMIT_AS, (limit, limit))


def worker_main(conn, memory_bytes: int) -> None:
    """Request loop: recv (source, export, payload), send (status, data)."""
    try:
        _apply_memory_limit(memory_bytes)
    except (OSError, ValueError):
        pass  # unsupported platform: wall-time limit still applies
    code_cache: dict[str, object] = {}
    while True:
        try:
            request = conn.recv()
        except (EOFError, OSError):
            return
        if request is None:  # shutdown
            return
        source, export, payload = request
        try:
            code = code_cache.get(source)
            if code is None:
                code = _compile_script(source)
                code_cache[source] = code
            module_globals = {"__builtins__": SAFE_BUILTINS, "__name__": "genlens_script"}
            exec(code, module_globals)
            exports = module_globals["__exports__"]
            if not isinstance(exports, dict) or export not in exports:
                conn.send(("error", "runtime", f"script does not export {export!r}"))
                continue
            result = exports[export](payload)
            # force plain JSON before crossing the process boundary
            result = json.loads(json.dumps(result))
        except _Forbidden as e:
            conn.send(("error", "forbidden", str(e)))
            continue
        except MemoryError:
            conn.send(("error", "memory", "memory limit exceeded"))
            continue
        except (TypeError, ValueError) as e:
            if "not JSON serializable" in str(e):
                conn.send(("error", "runtime", "export returned a non-JSON-serializable value"))
            else:
                conn.send(("error", "runtime", f"{type(e).__name__}: {e}"))
            continue
        except BaseException as e:  # user code can raise anything
            conn.send(("error", "runtime", f"{type(e).__name__}: {e}"))
            continue
        conn.send(("ok", result))
