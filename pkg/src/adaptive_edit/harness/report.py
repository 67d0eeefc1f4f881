"""Byte-stable CSV / JSON serialization of suite reports.

Floats are written with 9 significant digits, JSON keys are sorted, and
line endings are ``\\n`` so identical reports produce identical files.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from .suite import Report

__all__ = ["CSV_HEADER", "emit_report", "render_csv", "render_json", "report_to_dict"]

CSV_HEADER = ("scenario", "bucket", "config", "edit_mse", "preserve_mse", "mask_iou", "frame_steps")


def _num(x):
    if x is None:
        return None
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    return float(format(float(x), ".9g"))


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".9g")


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.rows:
        m = r.metrics
        if m is None:
            w.writerow([r.scenario, r.bucket, r.config, "", "", "", ""])
        else:
            w.writerow([r.scenario, r.bucket, r.config, _cell(m.edit_mse), _cell(m.preserve_mse),
                        _cell(m.mask_iou), _cell(m.frame_steps)])
    return buf.getvalue()


def _frac(x: Fraction | None):
    if x is None:
        return None
    return x.numerator if x.denominator == 1 else _num(x)


def report_to_dict(report: Report) -> dict:
    rows = []
    for r in report.rows:
        m = r.metrics
        rows.append({
            "scenario": r.scenario,
            "bucket": r.bucket,
            "config": r.config,
            "edit_mse": _num(m.edit_mse) if m else None,
            "preserve_mse": _num(m.preserve_mse) if m else None,
            "mask_iou": _num(m.mask_iou) if m else None,
            "frame_steps": m.frame_steps if m else None,
            "predicted": r.predicted,
            "n_r": r.n_r,
            "r": r.r,
            "error": r.error,
        })
    buckets = [{
        "config": s.config,
        "bucket": s.bucket,
        "count": s.count,
        "failed": s.failed,
        "edit_mse": _num(s.edit_mse),
        "preserve_mse": _num(s.preserve_mse),
        "mask_iou": _num(s.mask_iou),
        "frame_steps": _frac(s.frame_steps),
        "speedup": _frac(s.speedup),
    } for s in report.buckets]
    acc = report.classification_accuracy
    return {
        "rows": rows,
        "buckets": buckets,
        "baseline": report.baseline,
        "weights": {k: _num(v) for k, v in report.weights.items()},
        "confusion": report.confusion,
        "classification_accuracy": _num(acc),
        "failures": len(report.failures),
    }


def render_json(report: Report) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def emit_report(report: Report, fmt: str, path: str | Path) -> Path:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    text = render_csv(report) if fmt == "csv" else render_json(report)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
