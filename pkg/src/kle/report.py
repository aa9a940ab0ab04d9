"""CSV rows plus a JSON summary for every CLI run.

The CSV depends only on the results, so reruns with the same seed are
byte-identical.  Wall time and library versions live in the JSON summary.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
from importlib import metadata
from pathlib import Path

SCHEMA = 1


def versions() -> dict:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "scipy"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def _cell(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


def rows_to_csv(rows: list[dict], columns: list[str] | None = None, sort_by: str | None = None) -> str:
    """Render rows; an empty list still yields the header when ``columns`` is given."""
    if sort_by is not None:
        rows = sorted(rows, key=lambda r: r[sort_by])
    if columns is None:
        columns = []
        for r in rows:
            for key in r:
                if key not in columns:
                    columns.append(key)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and v != v:
        return None
    if isinstance(v, int) and not isinstance(v, bool) and abs(v) >= 1 << 53:
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):  # numpy scalar
        return v.item()
    return v


def summary_document(command: str, summary: dict, rows: list[dict], seed, wall_time: float) -> dict:
    return _jsonable({
        "schema": SCHEMA,
        "command": command,
        "seed": seed,
        "versions": versions(),
        "wall_time_s": round(wall_time, 6),
        **summary,
        "rows": rows,
    })


def emit_report(command: str, rows: list[dict], summary: dict, *, seed=None, wall_time: float = 0.0,
                fmt: str = "json", out: str | None = None, columns: list[str] | None = None,
                sort_by: str | None = None, stream=None) -> dict:
    """Write the run's output and return the JSON summary document.

    ``fmt="json"`` writes the summary (rows included) to ``out`` or stdout.
    ``fmt="csv"`` writes the rows as CSV to ``out`` or stdout; with ``out``
    set, the summary goes next to it as ``<out>.json``.
    """
    stream = stream or sys.stdout
    if sort_by is not None:
        rows = sorted(rows, key=lambda r: r[sort_by])
    doc = summary_document(command, summary, rows, seed, wall_time)
    if fmt == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if out:
            Path(out).write_text(text)
        else:
            stream.write(text)
    elif fmt == "csv":
        text = rows_to_csv(rows, columns)
        if out:
            Path(out).write_text(text)
            Path(str(out) + ".json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        else:
            stream.write(text)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return doc
