"""Serialization of result rows and raw ROC points.

CSV and JSON carry the same values: reals are rounded to 6 significant
digits before either encoding, so the two formats agree byte-for-value.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from fedmia.harness import ResultsRow
from fedmia.metrics import RocCurve

CSV_FIELDS = (
    "strategy",
    "split_index",
    "attack",
    "auc",
    "tpr_at_fpr",
    "accuracy",
    "comm_bytes",
    "seed",
)


def _sig6(value: float) -> float:
    return float(f"{value:.6g}")


def rows_to_records(rows: list[ResultsRow]) -> list[dict]:
    """Plain dicts in column order, reals at 6 significant digits."""
    return [
        {
            "strategy": row.strategy,
            "split_index": int(row.split_index),
            "attack": row.attack,
            "auc": _sig6(row.auc),
            "tpr_at_fpr": _sig6(row.tpr_at_fpr),
            "accuracy": _sig6(row.accuracy),
            "comm_bytes": int(row.comm_bytes),
            "seed": int(row.seed),
        }
        for row in rows
    ]


def roc_sibling_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + "_roc.json")


def write_roc_points(curves: dict[tuple[str, str], RocCurve], path: str | Path) -> None:
    """Raw pooled ROC points per (strategy, attack), for external plotting."""
    payload = [
        {
            "strategy": label,
            "attack": tag,
            "fpr": [float(v) for v in curve.fpr],
            "tpr": [float(v) for v in curve.tpr],
            # +inf opens every curve; JSON has no inf, so mark it null
            "thresholds": [float(v) if v not in (float("inf"), float("-inf")) else None for v in curve.thresholds],
        }
        for (label, tag), curve in sorted(curves.items())
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def emit_results(
    rows: list[ResultsRow],
    path: str | Path,
    format: str = "csv",
    roc_curves: dict[tuple[str, str], RocCurve] | None = None,
) -> None:
    """Write rows to path as CSV or JSON; optionally ROC points alongside."""
    if format not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    records = rows_to_records(rows)
    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for rec in records:
                writer.writerow(
                    [
                        rec["strategy"],
                        rec["split_index"],
                        rec["attack"],
                        f"{rec['auc']:.6g}",
                        f"{rec['tpr_at_fpr']:.6g}",
                        f"{rec['accuracy']:.6g}",
                        rec["comm_bytes"],
                        rec["seed"],
                    ]
                )
    else:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(records, fh, indent=2)
            fh.write("\n")
    if roc_curves is not None:
        write_roc_points(roc_curves, roc_sibling_path(path))
