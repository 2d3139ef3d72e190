"""Strict key-value config parser used by the CLI and scene files.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines
ignored.  Lists are whitespace-separated, matrices use ``;`` between rows.
Unknown and duplicate keys are rejected so typos fail fast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ConfigError", "Key", "parse_kv", "load_kv"]


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Key:
    """Schema entry: value kind plus optional default (None = required)."""

    kind: str  # int | float | str | int_list | float_list | int_matrix | float_matrix
    default: object = None
    required: bool = False


def _convert(kind: str, raw: str, where: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        if kind == "int_list":
            return [int(v) for v in raw.split()]
        if kind == "float_list":
            return [float(v) for v in raw.split()]
        if kind in ("int_matrix", "float_matrix"):
            cast = int if kind == "int_matrix" else float
            rows = [[cast(v) for v in row.split()] for row in raw.split(";")]
            if any(len(r) != len(rows[0]) for r in rows):
                raise ValueError("ragged matrix rows")
            return np.array(rows)
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {kind} from '{raw}' ({exc})") from None
    raise ConfigError(f"{where}: unknown schema kind '{kind}'")


def parse_kv(text: str, schema: dict, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        values[key] = _convert(schema[key].kind, raw, f"{source}:{lineno}")
    for key, spec in schema.items():
        if key not in values:
            if spec.required:
                raise ConfigError(f"{source}: missing required key '{key}'")
            values[key] = spec.default
    return values


def load_kv(path, schema: dict) -> dict:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_kv(text, schema, source=str(path))
