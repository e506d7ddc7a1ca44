"""
NDJSON / JSON writers with fixed float formatting.

All floats are written with 17 significant digits so that reruns with the
same config and seed produce byte-identical payload lines.
"""

import json
import math
from typing import Any, Iterable, Mapping

import numpy as np


def _encode(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if not math.isfinite(x):
            return "null"
        return format(x, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Mapping):
        items = ",".join(f"{json.dumps(str(k))}:{_encode(v)}" for k, v in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_encode(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(record: Mapping[str, Any]) -> str:
    """Serialize one record to a single JSON line (no trailing newline)."""
    return _encode(record)


def write_ndjson(path: str, records: Iterable[Mapping[str, Any]]) -> int:
    """
    Write records as newline-delimited JSON.

    Returns:
        Number of lines written
    """
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(dumps(record))
            fh.write("\n")
            count += 1
    return count


def write_json(path: str, record: Mapping[str, Any]) -> None:
    """Write a single JSON document followed by a newline."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(record))
        fh.write("\n")
