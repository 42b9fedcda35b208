"""Canonical JSON and CSV float formatting.

All files this package writes go through these helpers so that identical
values always produce identical bytes.  Floats are printed with 17
significant digits, which round-trips IEEE double exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialize non-finite float %r" % (x,))
    return FLOAT_FMT % x


def canonical_json(obj: Any, indent: int = 0) -> str:
    """Serialize to JSON with fixed float formatting and stable key order.

    Dict insertion order is preserved (callers build dicts
    deterministically), so equal inputs yield byte-equal output.
    """
    out: list[str] = []
    _write(obj, out, indent, 0)
    return "".join(out)


def _write(obj: Any, out: list[str], indent: int, depth: int) -> None:
    nl = "\n" + " " * (indent * (depth + 1)) if indent else ""
    nl_close = "\n" + " " * (indent * depth) if indent else ""
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError("JSON object keys must be str, got %r" % (key,))
            if k:
                out.append(",")
            out.append(nl)
            out.append(json.dumps(key))
            out.append(": " if indent else ":")
            _write(val, out, indent, depth + 1)
        if obj:
            out.append(nl_close)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(",")
            out.append(nl)
            _write(val, out, indent, depth + 1)
        if obj:
            out.append(nl_close)
        out.append("]")
    else:
        # numpy scalars land here; coerce through item()
        item = getattr(obj, "item", None)
        if item is not None:
            _write(item(), out, indent, depth)
        else:
            raise TypeError("cannot serialize %r" % (type(obj),))
