"""Readers for the versioned levyclaw file contracts.

Everything here consumes only the documented CSV/JSON formats; nothing
imports the solver.  Schema violations raise SchemaError naming the
expected schema version.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MANIFEST_SCHEMA = "levyclaw/manifest/v1"
REPORT_SCHEMA = "levyclaw/report/v1"

SNAPSHOT_COLUMNS = ("x", "u", "A_u", "g_A_u")
FIELD_COLUMNS = ("t", "x", "xi", "value")
DISTANCE_COLUMNS = ("t", "l1_distance", "l1_pos_part", "l1_neg_part")

__all__ = ["SchemaError", "RunData", "FieldData", "DistanceData",
           "load_manifest", "load_run", "load_field", "load_distance",
           "load_convergence"]


class SchemaError(ValueError):
    def __init__(self, path, expected, detail):
        super().__init__(f"{path}: {detail} (expected schema {expected!r})")
        self.expected = expected


def _read_csv_columns(path: Path, expected_cols, schema_name: str) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(path, schema_name, "empty file")
        if tuple(header) != tuple(expected_cols):
            missing = set(expected_cols) - set(header)
            detail = f"missing columns {sorted(missing)}" if missing \
                else f"unexpected header {header}"
            raise SchemaError(path, schema_name, detail)
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise SchemaError(path, schema_name, "no data rows")
    data = np.asarray(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(expected_cols)}


@dataclass
class RunData:
    times: np.ndarray
    x: np.ndarray
    u: np.ndarray        # (M, N)
    a_u: np.ndarray
    g_a_u: np.ndarray
    manifest: dict


@dataclass
class FieldData:
    times: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    values: np.ndarray   # (M, N, K)


@dataclass
class DistanceData:
    times: np.ndarray
    distance: np.ndarray
    pos_part: np.ndarray
    neg_part: np.ndarray


def load_manifest(run_dir: Path) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.exists():
        raise SchemaError(path, MANIFEST_SCHEMA, "manifest.json not found")
    doc = json.loads(path.read_text())
    if doc.get("schema") != MANIFEST_SCHEMA:
        raise SchemaError(path, MANIFEST_SCHEMA,
                          f"schema is {doc.get('schema')!r}")
    return doc


def load_run(run_dir: Path) -> RunData:
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)
    times, us, aus, gaus = [], [], [], []
    x = None
    for snap in manifest["snapshots"]:
        cols = _read_csv_columns(run_dir / snap["file"], SNAPSHOT_COLUMNS,
                                 "levyclaw/snapshot/v1")
        if x is None:
            x = cols["x"]
        times.append(float(snap["t"]))
        us.append(cols["u"])
        aus.append(cols["A_u"])
        gaus.append(cols["g_A_u"])
    return RunData(times=np.asarray(times), x=x, u=np.stack(us),
                   a_u=np.stack(aus), g_a_u=np.stack(gaus), manifest=manifest)


def load_field(path: Path) -> FieldData:
    cols = _read_csv_columns(Path(path), FIELD_COLUMNS, "levyclaw/field/v1")
    times = np.unique(cols["t"])
    x = np.unique(cols["x"])
    xi = np.unique(cols["xi"])
    expected = times.size * x.size * xi.size
    if cols["value"].size != expected:
        raise SchemaError(path, "levyclaw/field/v1",
                          f"{cols['value'].size} rows, expected a full "
                          f"{times.size} x {x.size} x {xi.size} grid")
    # rows are written t-major, then x, then xi
    values = cols["value"].reshape(times.size, x.size, xi.size)
    return FieldData(times=times, x=x, xi=xi, values=values)


def load_distance(path: Path) -> DistanceData:
    cols = _read_csv_columns(Path(path), DISTANCE_COLUMNS, "levyclaw/field/v1")
    return DistanceData(times=cols["t"], distance=cols["l1_distance"],
                        pos_part=cols["l1_pos_part"], neg_part=cols["l1_neg_part"])


def load_convergence(path: Path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != REPORT_SCHEMA:
        raise SchemaError(path, REPORT_SCHEMA, f"schema is {doc.get('schema')!r}")
    for key in ("grids", "l1_errors", "orders"):
        if key not in doc:
            raise SchemaError(path, REPORT_SCHEMA, f"missing key {key!r}")
    return doc
