"""Flat key=value configuration files with # comments."""
from __future__ import annotations

from pathlib import Path

from ..errors import ValidationError


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_")


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; keys are CLI flag names with or without dashes."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ValidationError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_config(path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
