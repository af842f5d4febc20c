"""Building configuration dataclasses from parsed TOML tables.

Every section maps onto a frozen dataclass. Nested dataclasses, tables
(``{x = [...], y = [...]}`` or with ``z`` for 2-D) and tuples are converted
by field annotation. Errors carry the dotted path of the offending key.
"""

from __future__ import annotations

import dataclasses
import sys
import types
import typing
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core_types import ConfigError
from .primitives import Table1D, Table2D


def load_toml(path: str | Path) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("file not found", str(path)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", str(path)) from None


def loads_toml(text: str, label: str = "<string>") -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}", label) from None


def _convert(value: Any, tp: Any, path: str) -> Any:
    origin = typing.get_origin(tp)
    if origin is typing.Union or origin is types.UnionType:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _convert(value, args[0], path)
    if tp is Table1D:
        if isinstance(value, Table1D):
            return value
        if isinstance(value, (int, float)):
            return Table1D.constant(float(value), path)
        if not isinstance(value, dict):
            raise ConfigError("expected a table with x and y arrays", path)
        return Table1D.from_dict(value, path)
    if tp is Table2D:
        if isinstance(value, Table2D):
            return value
        if not isinstance(value, dict):
            raise ConfigError("expected a table with x, y and z arrays", path)
        return Table2D.from_dict(value, path)
    if dataclasses.is_dataclass(tp):
        if dataclasses.is_dataclass(value):
            return value
        if not isinstance(value, dict):
            raise ConfigError("expected a table", path)
        return build(tp, value, path)
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError("expected an array", path)
        args = typing.get_args(tp)
        inner = args[0] if args else float
        return tuple(_convert(v, inner, f"{path}[{i}]") for i, v in enumerate(value))
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", path)
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {value!r}", path)
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    return value


def build(cls, data: dict | None, path: str, base=None):
    """Instantiate dataclass ``cls`` from ``data``, rejecting unknown keys.

    With ``base`` given, keys absent from ``data`` keep the values of ``base``.
    """
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("expected a table", path)
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)}", path)
    kwargs = {name: _convert(value, hints[name], f"{path}.{name}")
              for name, value in data.items()}
    try:
        if base is not None:
            return dataclasses.replace(base, **kwargs)
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from None
