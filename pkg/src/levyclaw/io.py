"""Stable file contracts: snapshot CSVs, field CSVs, JSON reports, manifests.

All numeric output uses repr round-trip floats and no timestamps, so
re-running a stage on unchanged inputs is byte-identical.  Every file a
stage produces is listed in its manifest with a SHA-256 content hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

SNAPSHOT_SCHEMA = "levyclaw/snapshot/v1"
FIELD_SCHEMA = "levyclaw/field/v1"
MANIFEST_SCHEMA = "levyclaw/manifest/v1"
REPORT_SCHEMA = "levyclaw/report/v1"

__all__ = [
    "SNAPSHOT_SCHEMA", "FIELD_SCHEMA", "MANIFEST_SCHEMA", "REPORT_SCHEMA",
    "snapshot_name", "write_snapshot", "read_snapshot", "write_field_csv",
    "write_distance_csv", "write_json", "read_json", "sha256_of",
    "manifest_entry",
]


def _fmt(value: float) -> str:
    return repr(float(value))


def snapshot_name(step: int) -> str:
    return f"snapshot_{step:08d}.csv"


def write_snapshot(path: Path, x, u, a_u, g_a_u):
    """Columns (x, u, A_u, g_A_u) at full round-trip precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "u", "A_u", "g_A_u"])
        for row in zip(x, u, a_u, g_a_u):
            writer.writerow([_fmt(v) for v in row])


def read_snapshot(path: Path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return (np.atleast_1d(data["x"]), np.atleast_1d(data["u"]),
            np.atleast_1d(data["A_u"]), np.atleast_1d(data["g_A_u"]))


def write_field_csv(path: Path, times, x, xi, field):
    """Long (tidy) layout: one (t, x, xi, value) row per entry.

    ``field`` has shape (len(times), len(x), len(xi)).
    """
    field = np.asarray(field)
    if field.shape != (len(times), len(x), len(xi)):
        raise ValueError(f"field shape {field.shape} does not match axes "
                         f"({len(times)}, {len(x)}, {len(xi)})")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x", "xi", "value"])
        for it, t in enumerate(times):
            ts = _fmt(t)
            for ix, xv in enumerate(x):
                xs = _fmt(xv)
                for ik, kv in enumerate(xi):
                    writer.writerow([ts, xs, _fmt(kv), _fmt(field[it, ix, ik])])


def write_distance_csv(path: Path, times, distance, pos_part, neg_part):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "l1_distance", "l1_pos_part", "l1_neg_part"])
        for row in zip(times, distance, pos_part, neg_part):
            writer.writerow([_fmt(v) for v in row])


class _NumpyEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, np.bool_):
            return bool(obj)
        return super().default(obj)


def write_json(path: Path, obj: dict):
    Path(path).write_text(json.dumps(obj, indent=2, cls=_NumpyEncoder) + "\n")


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_entry(path: Path) -> dict:
    path = Path(path)
    return {"file": path.name, "sha256": sha256_of(path), "bytes": path.stat().st_size}
