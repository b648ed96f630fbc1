"""Runtime configuration for the service and CLI.

Settings resolve in three layers, later ones winning: built-in defaults,
a flat key = value config file, then ENGINE_* environment variables.
The file format is a toml-style subset: one assignment per line, strings
optionally double-quoted, # comments, booleans true/false.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .errors import ResourceError, ValidationError

__all__ = ["ENV_PREFIX", "EngineConfig", "load_config", "parse_config_text"]

ENV_PREFIX = "ENGINE_"

_KEY_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_INT_PATTERN = re.compile(r"^[+-]?\d+$")

_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class EngineConfig:
    """Resolved settings shared by the HTTP service and the CLI.

    model_path and embeddings_path stay None until an operator points
    them at artifacts; token None means the service accepts requests
    without authentication. static_dir names a directory of web client
    files the service should serve alongside the API.
    """

    model_path: str | None = None
    embeddings_path: str | None = None
    static_dir: str | None = None
    token: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    request_limit_bytes: int = 1_048_576
    token_budget: int = 512

    def __post_init__(self) -> None:
        if not 1 <= self.port <= 65535:
            raise ValidationError(f"port {self.port} outside 1..65535")
        if self.request_limit_bytes < 1:
            raise ValidationError(
                f"request_limit_bytes {self.request_limit_bytes} must be positive"
            )
        if self.token_budget < 1:
            raise ValidationError(f"token_budget {self.token_budget} must be positive")


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}
_INT_FIELDS = frozenset(
    name for name, kind in _FIELD_TYPES.items() if kind == "int"
)
_STRING_FIELDS = frozenset(_FIELD_TYPES) - _INT_FIELDS


def _unquote(raw: str, line: int) -> str:
    out: list[str] = []
    i = 1
    while i < len(raw):
        ch = raw[i]
        if ch == '"':
            if raw[i + 1 :].strip():
                raise ValidationError(f"line {line}: text after closing quote")
            return "".join(out)
        if ch == "\\":
            i += 1
            if i >= len(raw) or raw[i] not in _ESCAPES:
                raise ValidationError(f"line {line}: unsupported escape sequence")
            out.append(_ESCAPES[raw[i]])
        else:
            out.append(ch)
        i += 1
    raise ValidationError(f"line {line}: unterminated string")


def _parse_value(raw: str, line: int) -> str | int | float | bool:
    if raw.startswith('"'):
        return _unquote(raw, line)
    # Unquoted values may carry a trailing comment.
    raw = raw.split("#", 1)[0].strip()
    if not raw:
        raise ValidationError(f"line {line}: missing value")
    if raw == "true":
        return True
    if raw == "false":
        return False
    if _INT_PATTERN.match(raw):
        return int(raw)
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_config_text(text: str) -> dict[str, str | int | float | bool]:
    """Parse flat key = value assignments into a dictionary.

    Keys are bare identifiers; duplicate keys are rejected so a typo
    cannot silently lose a setting.
    """
    values: dict[str, str | int | float | bool] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"line {number}: expected key = value")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if not _KEY_PATTERN.match(key):
            raise ValidationError(f"line {number}: bad key {key!r}")
        if key in values:
            raise ValidationError(f"line {number}: duplicate key {key!r}")
        values[key] = _parse_value(raw_value.strip(), number)
    return values


def _coerce(key: str, value: str | int | float | bool) -> str | int | None:
    """Check a raw setting against its field's type.

    Environment values arrive as strings and are converted; file values
    must already have the right parsed type. Empty strings clear the
    optional fields back to None.
    """
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, str) and _INT_PATTERN.match(value.strip()):
                return int(value)
            raise ValidationError(f"{key} expects an integer, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ValidationError(f"{key} expects a string, got {value!r}")
    if value == "":
        return None
    return value


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
) -> EngineConfig:
    """Resolve an EngineConfig from defaults, an optional file, and env.

    Environment variables are named ENGINE_<FIELD> (upper-case field
    name); they override the file, which overrides the defaults. Unknown
    keys in the file are rejected; unrelated ENGINE_* variables are too,
    so a misspelled override never passes silently.
    """
    settings: dict[str, object] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ResourceError(f"config file not found at {path}")
        for key, value in parse_config_text(path.read_text(encoding="utf-8")).items():
            if key not in _FIELD_TYPES:
                raise ValidationError(
                    f"unknown config key {key!r}; expected one of "
                    f"{', '.join(sorted(_FIELD_TYPES))}"
                )
            settings[key] = _coerce(key, value)
    if env is None:
        env = os.environ
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX) :].lower()
        if key not in _FIELD_TYPES:
            raise ValidationError(f"unknown environment override {name}")
        settings[key] = _coerce(key, value)
    return EngineConfig(**settings)
