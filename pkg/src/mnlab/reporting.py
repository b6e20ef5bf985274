"""Report serialisation: canonical JSON/CSV with atomic writes.

Reports must be byte-identical across runs for a fixed configuration and
seed, so serialisation is fully canonical (sorted keys, repr floats) and
contains no timestamps.  Writes go through a temp file in the target
directory followed by an atomic rename; a failed computation never leaves
a partial report behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

__all__ = ["json_bytes", "csv_bytes", "atomic_write_bytes", "write_report"]


def json_bytes(obj) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, two-space indent, trailing newline."""
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode("utf-8")


def csv_bytes(rows) -> bytes:
    """CSV with comma separator and '.' decimals (floats via repr upstream)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue().encode("utf-8")


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via temp-and-rename so partial results never hit ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(obj, path, fmt: str = "json", rows=None) -> None:
    """Serialise ``obj`` (or ``rows`` for CSV) to ``path`` atomically."""
    if fmt == "json":
        atomic_write_bytes(path, json_bytes(obj))
    elif fmt == "csv":
        if rows is None:
            raise ValueError("CSV output needs rows")
        atomic_write_bytes(path, csv_bytes(rows))
    else:
        raise ValueError(f"unknown format {fmt!r}")
