"""Endpoint configuration and sampling parameters.

The API key is never stored: only the name of the environment variable
holding it is configured, and the key is read at request time.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from ..errors import ValidationFailure

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_API_KEY_ENV = "GENLENS_API_KEY"


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key_env: str = DEFAULT_API_KEY_ENV
    timeout_s: float = 120.0
    max_concurrency: int = 8
    max_retries: int = 3
    backoff_base_s: float = 1.0

    def resolve_api_key(self) -> str | None:
        return os.environ.get(self.api_key_env) or None

    @classmethod
    def from_toml(cls, path: str | Path) -> "EndpointConfig":
        with Path(path).open("rb") as fh:
            data = tomllib.load(fh)
        section = data.get("endpoint")
        if not isinstance(section, dict):
            raise ValidationFailure(f"{path}: missing [endpoint] section")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(section) - known
        if unknown:
            raise ValidationFailure(f"{path}: unknown endpoint keys {sorted(unknown)}")
        try:
            return cls(**section)
        except TypeError as e:
            raise ValidationFailure(f"{path}: {e}") from e


@dataclass(frozen=True)
class SamplingParams:
    """Sampling settings; temperature/top_p defaults follow the usual
    multi-seed sweep setup (0.7 / 0.95)."""

    temperature: float = 0.7
    top_p: float = 0.95
    seed: int | None = None
    max_tokens: int = 1024
    stop: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValidationFailure("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ValidationFailure("top_p must be in (0, 1]")
        if self.max_tokens <= 0:
            raise ValidationFailure("max_tokens must be positive")

    def with_seed(self, seed: int | None) -> "SamplingParams":
        return replace(self, seed=seed)

    def request_fields(self) -> dict[str, Any]:
        fields: dict[str, Any] = {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
        }
        if self.seed is not None:
            fields["seed"] = self.seed
        if self.stop:
            fields["stop"] = list(self.stop)
        return fields

    def to_json(self) -> dict[str, Any]:
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "seed": self.seed,
            "max_tokens": self.max_tokens,
            "stop": list(self.stop),
        }
