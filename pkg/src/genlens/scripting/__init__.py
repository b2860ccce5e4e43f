"""Sandboxed execution of user-defined statistics, predicates, and transforms."""

from .host import (
    EXAMPLE_PERSISTENCE_SCRIPT,
    SandboxLimits,
    Script,
    ScriptHost,
    load_script,
)

__all__ = [
    "EXAMPLE_PERSISTENCE_SCRIPT",
    "SandboxLimits",
    "Script",
    "ScriptHost",
    "load_script",
]
