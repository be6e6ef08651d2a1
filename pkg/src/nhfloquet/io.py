"""Byte-stable CSV / JSON emission."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    """Serialize one cell: floats with 17 significant digits, ints verbatim."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(value)


def write_csv(path, header, rows) -> Path:
    """Write rows (dicts or sequences) under a fixed header with LF line endings."""
    path = Path(path)
    lines = [",".join(header)]
    for r in rows:
        cells = [r.get(h) for h in header] if isinstance(r, dict) else list(r)
        lines.append(",".join(_escape(fmt(c)) for c in cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _escape(cell: str) -> str:
    if any(ch in cell for ch in ',"\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def read_csv(path) -> tuple[list, list]:
    """Parse a file written by ``write_csv`` back into (header, rows of str)."""
    import csv
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [dict(zip(header, r)) for r in reader]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def write_json(path, payload) -> Path:
    path = Path(path)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")
    return path


def write_matrix(path, M, header: str | None = None) -> Path:
    """Whitespace-delimited matrix (gnuplot ``matrix`` friendly)."""
    path = Path(path)
    lines = [f"# {header}"] if header else []
    for row in np.asarray(M):
        lines.append(" ".join(fmt(float(x)) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path
