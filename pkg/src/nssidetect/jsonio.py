"""Canonical JSON encoding shared by every artifact this package writes.

Reports, model files and vocabulary exports must be byte-identical across
repeated runs with the same seed, so the encoder is deliberately rigid:
object keys are emitted in sorted order, floats are rendered with 17
significant digits (enough for exact float64 round-trips), and non-finite
floats are rejected rather than emitted as the non-standard ``NaN`` /
``Infinity`` tokens.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np


def format_float(value: float) -> str:
    """Render a float with 17 significant digits (exact round-trip)."""
    if not math.isfinite(value):
        raise ValueError(f"non-finite float {value!r} cannot be serialized")
    text = format(value, ".17g")
    if "e" not in text and "E" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj: Any, indent: int | None, level: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, (list, tuple)):
        items = [_encode(item, indent, level + 1) for item in obj]
        return _wrap("[", items, "]", indent, level)
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {key!r}")
            encoded = _encode(obj[key], indent, level + 1)
            sep = ": " if indent is not None else ":"
            items.append(f"{json.dumps(key, ensure_ascii=False)}{sep}{encoded}")
        return _wrap("{", items, "}", indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__} to canonical JSON")


def _wrap(open_ch: str, items: list[str], close_ch: str, indent: int | None, level: int) -> str:
    if not items:
        return open_ch + close_ch
    if indent is None:
        return open_ch + ",".join(items) + close_ch
    pad = " " * (indent * (level + 1))
    body = (",\n" + pad).join(items)
    return f"{open_ch}\n{pad}{body}\n{' ' * (indent * level)}{close_ch}"


def canonical_json(obj: Any, indent: int | None = None) -> str:
    """Serialize ``obj`` deterministically (sorted keys, 17-digit floats)."""
    return _encode(obj, indent, 0)


def dump_json(obj: Any, path: str | Path, indent: int | None = 2) -> None:
    """Write canonical JSON (plus trailing newline) to ``path``."""
    Path(path).write_text(canonical_json(obj, indent=indent) + "\n", encoding="utf-8")


def load_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
