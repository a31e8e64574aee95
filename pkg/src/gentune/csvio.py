"""Versioned CSV schemas shared by all experiments.

Headers are the schema: every file starts with an exact header row, floats
are written with shortest round-trip formatting, and reruns with the same
seed reproduce files byte-for-byte except in the timing-derived columns
listed here.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DataError

SCHEMAS = {
    "toy_gms_ipl": [
        "schema_version", "experiment", "replication", "method", "budget_mode",
        "budget", "train_steps", "label_solves", "ipl", "ipl_mc_std_err",
        "label_time_s", "train_time_s", "eval_time_s", "seed",
    ],
    # replication-aggregated rows consumed verbatim by the figures tool
    "toy_gms_ipl_summary": [
        "schema_version", "experiment", "method", "budget", "replications",
        "ipl_mean", "ipl_std_err", "seed",
    ],
    "ridge_curves": [
        "schema_version", "experiment", "method", "lambda", "value",
        "std_err", "selected",
    ],
    "ridge_summary": [
        "schema_version", "experiment", "method", "selected_lambda",
        "test_mse", "eval_time_s", "train_time_s", "seed",
    ],
    "quantile_sweep": [
        "schema_version", "experiment", "replication", "q", "lambda",
        "objective", "iterations", "converged", "pred_at_mean",
        "fit_time_s", "seed",
    ],
    # column names fixed by the tuning-curve file contract
    "mnist_curve": ["lambda", "val_loss", "val_acc"],
    "mnist_summary": [
        "schema_version", "experiment", "method", "lambda", "val_loss",
        "val_acc", "test_acc", "train_time_s", "curve_time_s", "speedup",
        "seed",
    ],
}

SCHEMA_VERSION = 1

# Columns whose values depend on wall-clock measurement; the determinism
# contract is byte identity everywhere else.
TIMING_COLUMNS = frozenset({
    "label_time_s", "train_time_s", "eval_time_s", "curve_time_s",
    "fit_time_s", "speedup",
})


def format_value(v) -> str:
    if isinstance(v, float):
        if not np.isfinite(v):
            raise DataError(f"non-finite value {v!r} in CSV row")
        return repr(v)
    if isinstance(v, bool):
        return "1" if v else "0"
    return str(v)


def write_csv(path, schema_name: str, rows) -> Path:
    """Write rows (dicts) under the named schema; returns the path."""
    header = SCHEMAS[schema_name]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            missing = [c for c in header if c not in row]
            if missing:
                raise DataError(f"{schema_name} row missing columns {missing}")
            w.writerow([format_value(row[c]) for c in header])
    return path


def read_csv(path):
    """Header and observation rows of a schema CSV."""
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise DataError(f"{path}: empty CSV")
    return rows[0], rows[1:]


def validate_header(path, schema_name: str) -> None:
    header, _ = read_csv(path)
    if header != SCHEMAS[schema_name]:
        raise DataError(
            f"{path}: header {header} does not match schema "
            f"{schema_name} {SCHEMAS[schema_name]}")


def diff_ignoring_timing(path_a, path_b) -> list:
    """Cell-level differences between two schema CSVs outside timing columns."""
    header_a, rows_a = read_csv(path_a)
    header_b, rows_b = read_csv(path_b)
    diffs = []
    if header_a != header_b:
        return [("header", str(header_a), str(header_b))]
    if len(rows_a) != len(rows_b):
        return [("row_count", str(len(rows_a)), str(len(rows_b)))]
    for i, (ra, rb) in enumerate(zip(rows_a, rows_b)):
        for col, va, vb in zip(header_a, ra, rb):
            if col in TIMING_COLUMNS:
                continue
            if va != vb:
                diffs.append((f"row {i} col {col}", va, vb))
    return diffs
