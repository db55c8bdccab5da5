"""Deterministic JSON/CSV emission of reports and the matching parser."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

FORMATS = ("json", "csv")


def _plain(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("nan", "inf", "-inf"):
        return float(obj)
    return obj


def to_json(report, meta: dict | None = None) -> str:
    doc = {"report": _plain(report), "meta": _plain(meta or {})}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def parse_report(text: str) -> dict:
    """Inverse of :func:`to_json`: returns ``{"report": ..., "meta": ...}``."""
    return _restore(json.loads(text))


def to_csv(report) -> str:
    """One row per (member, x, t) for verification reports, one row otherwise."""
    d = _plain(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if "rows" in d:
        w.writerow(["member", "x", "t", "lhs", "rhs", "ratio"])
        for member, x, t, lhs, rhs, ratio in d["rows"]:
            w.writerow([member, ";".join(repr(v) for v in x), repr(t), repr(lhs), repr(rhs), repr(ratio)])
    else:
        scalars = {k: v for k, v in sorted(d.items()) if not isinstance(v, (dict, list))}
        w.writerow(list(scalars))
        w.writerow([repr(v) if isinstance(v, float) else v for v in scalars.values()])
    return buf.getvalue()


def emit_report(report, fmt: str = "json", path=None, meta: dict | None = None) -> str:
    """Render ``report`` and write it to ``path`` when given; returns the text."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    text = to_json(report, meta) if fmt == "json" else to_csv(report)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
