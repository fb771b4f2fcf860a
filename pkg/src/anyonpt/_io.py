"""Deterministic file output: fixed-format CSV and NDJSON with atomic writes.

Floats are rendered with 12 significant digits so that identical configs
produce byte-identical files.  Every file is written to a temporary sibling
and renamed into place, so a failing run never leaves partial output.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

__all__ = ["fmt", "write_csv", "write_ndjson"]


def fmt(value) -> str:
    """Render a cell: floats at 12 significant digits, everything else as str."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return f"{value:.12g}"
    return str(value)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_ndjson(path, records) -> Path:
    path = Path(path)
    lines = [json.dumps(_round_floats(rec), separators=(",", ":")) for rec in records]
    _atomic_write(path, "\n".join(lines) + "\n")
    return path
