"""HTTP service wrapping the core modules."""

from .app import create_app
from .state import SessionState, UnknownId

__all__ = ["SessionState", "UnknownId", "create_app"]
