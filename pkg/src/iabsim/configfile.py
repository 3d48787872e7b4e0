"""Flat ``key = value`` config files mapped onto ``ScenarioConfig``.

One assignment per line, keys are ``ScenarioConfig`` field names, ``#`` starts
a comment. Pairs such as ``antenna_dims`` accept ``8,8`` or ``8x8``; optional
fields accept ``none`` (``auto`` for ``num_rf_chains``) to keep the default rule.
"""

from __future__ import annotations

import dataclasses
import typing
from pathlib import Path
from typing import Dict, Union

from .errors import ConfigError
from .scenario import ScenarioConfig

_NONE_WORDS = {"none", "auto", "null", ""}


def _field_types() -> Dict[str, object]:
    return typing.get_type_hints(ScenarioConfig)


def _parse_scalar(kind, text: str):
    if kind is int:
        return int(text, 0)
    if kind is float:
        return float(text)
    raise TypeError(f"unsupported field type {kind!r}")


def _parse_value(kind, text: str):
    text = text.strip()
    origin = typing.get_origin(kind)
    if origin is Union:  # Optional[X]
        inner = [a for a in typing.get_args(kind) if a is not type(None)][0]
        if text.lower() in _NONE_WORDS:
            return None
        return _parse_value(inner, text)
    if origin is tuple:
        parts = [p for p in text.replace("x", ",").replace("X", ",").replace("(", "").replace(")", "").split(",")]
        args = typing.get_args(kind)
        if len(parts) != len(args):
            raise ValueError(f"expected {len(args)} comma-separated values")
        return tuple(_parse_scalar(a, p.strip()) for a, p in zip(args, parts))
    return _parse_scalar(kind, text)


def parse_config(text: str, base: ScenarioConfig = ScenarioConfig()) -> ScenarioConfig:
    """Parse config ``text`` on top of ``base``; errors name the field and line."""
    types = _field_types()
    changes = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError("unknown key", field=key, line=lineno)
        if key in changes:
            raise ConfigError("duplicate key", field=key, line=lineno)
        try:
            changes[key] = _parse_value(types[key], value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"cannot parse {value!r}: {exc}", field=key, line=lineno) from None
        lines[key] = lineno
    try:
        return dataclasses.replace(base, **changes)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], field=exc.field, line=lines.get(exc.field)) from None


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def format_config(config: ScenarioConfig) -> str:
    """Inverse of ``parse_config``: every field, one per line."""
    out = []
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        if v is None:
            s = "none"
        elif isinstance(v, tuple):
            s = ",".join(repr(x) for x in v)
        else:
            s = repr(v)
        out.append(f"{f.name} = {s}")
    return "\n".join(out) + "\n"


def config_to_dict(config: ScenarioConfig) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(config).items()}
