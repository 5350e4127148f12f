"""Deterministic JSON emission.

Model artefacts must serialize byte-identically across runs: keys keep
insertion order and every float is rendered with 17 significant digits.
"""

from __future__ import annotations

import json

import numpy as np


def _render(value, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_render(v, indent, level + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + close_pad + "}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = [f"{pad}{_render(v, indent, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close_pad + "]"
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not np.isfinite(v):
            raise ValueError(f"cannot serialize non-finite float {v!r}")
        return format(v, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        return _render(value.tolist(), indent, level)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialize with stable key order and fixed float formatting."""
    return _render(obj, indent, 0) + "\n"
