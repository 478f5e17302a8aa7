"""Run reports: JSON documents with a stable key order plus a plain-text table.

Schema (``report_version`` 1)::

    {
      "command": str,
      "parameters": {...},          # flags as parsed
      "results": [ {...}, ... ],    # one record per image, sorted by "id"
      "summary": {...},             # command-specific aggregates
      "seed": int | null,
      "tool": "svdenoise",
      "tool_version": str,
      "report_version": 1
    }

Wall-clock measurements live exclusively under keys named ``timings_ms``; two
runs with identical inputs differ only there (see :func:`strip_timings`).
Non-finite floats are written as the strings ``"inf"``, ``"-inf"``, ``"nan"``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from . import __version__

REPORT_VERSION = 1
TIMING_KEY = "timings_ms"


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _json_safe(obj.item())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def make_report(command: str, parameters: dict, results: list, summary: dict | None = None, seed=None) -> dict:
    return {
        "command": command,
        "parameters": parameters,
        "results": results,
        "summary": summary or {},
        "seed": seed,
        "tool": "svdenoise",
        "tool_version": __version__,
        "report_version": REPORT_VERSION,
    }


def dumps(report: dict) -> str:
    return json.dumps(_json_safe(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path, report: dict) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")


def strip_timings(obj):
    """Copy of a report with every ``timings_ms`` entry removed."""
    if isinstance(obj, dict):
        return {k: strip_timings(v) for k, v in obj.items() if k != TIMING_KEY}
    if isinstance(obj, list):
        return [strip_timings(v) for v in obj]
    return obj


def format_table(columns: list[str], rows: list[list]) -> str:
    """Left-aligned first column, right-aligned numeric columns."""

    def cell(v):
        if isinstance(v, float):
            return "inf" if math.isinf(v) else f"{v:.4f}"
        return str(v)

    body = [[cell(v) for v in row] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in body)) if body else len(c) for i, c in enumerate(columns)]

    def fmt(r):
        return "  ".join(r[i].ljust(widths[i]) if i == 0 else r[i].rjust(widths[i]) for i in range(len(columns)))

    lines = [fmt(columns), "  ".join("-" * w for w in widths)]
    lines.extend(fmt(r) for r in body)
    return "\n".join(lines)
