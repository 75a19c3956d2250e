"""File formats for scan tables, camera frames and analysis reports.

Two interchange layouts are used throughout:

* scan tables (detuning rows vs angle columns) as CSV or JSON,
* camera frame stacks as JSON lines: a metadata header object followed
  by one integer array per frame.

Writers are loss-free for everything the readers reconstruct; report
writing is one-way (reports are consumed by people and plot scripts).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .detector import FrameSet
from .propagation import AngularSpectrum

__all__ = [
    "jsonify",
    "write_scan_csv",
    "read_scan_csv",
    "write_scan_json",
    "read_scan_json",
    "write_frames_jsonl",
    "read_frames_jsonl",
    "write_histogram_csv",
    "write_report",
    "write_rows_csv",
]

_MRAD = 1e3


def jsonify(obj):
    """Recursively convert numpy containers and scalars to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


# ---------------------------------------------------------------------------
# Scan tables


def write_scan_csv(path, scan: AngularSpectrum) -> Path:
    """Write a detuning scan as CSV: one row per detuning, one column
    per emission angle (column headers carry the angle in mrad)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detuning_hz"] + [f"{a * _MRAD:.9g}" for a in scan.angles])
        for delta, row in zip(scan.detunings, scan.intensity):
            writer.writerow([f"{delta / (2 * np.pi):.9g}"] + [f"{v:.9g}" for v in row])
    return path


def read_scan_csv(path) -> AngularSpectrum:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "detuning_hz":
        raise ValueError(f"{path} is not a scan table (missing detuning_hz header)")
    angles = np.array([float(v) for v in rows[0][1:]]) / _MRAD
    detunings = np.array([float(r[0]) for r in rows[1:]]) * 2 * np.pi
    intensity = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    resolution = float(angles[1] - angles[0]) if angles.size > 1 else 0.0
    return AngularSpectrum(
        detunings=detunings,
        angles=angles,
        intensity=intensity,
        angular_resolution=resolution,
        provenance="file",
        metadata={"source": str(path)},
    )


def write_scan_json(path, scan: AngularSpectrum) -> Path:
    path = Path(path)
    payload = {
        "format": "gemscope-scan",
        "detunings_rad_s": jsonify(scan.detunings),
        "angles_rad": jsonify(scan.angles),
        "intensity": jsonify(scan.intensity),
        "angular_resolution_rad": scan.angular_resolution,
        "provenance": scan.provenance,
        "metadata": jsonify(scan.metadata),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def read_scan_json(path) -> AngularSpectrum:
    path = Path(path)
    payload = json.loads(path.read_text())
    if payload.get("format") != "gemscope-scan":
        raise ValueError(f"{path} is not a scan file")
    return AngularSpectrum(
        detunings=np.asarray(payload["detunings_rad_s"], dtype=float),
        angles=np.asarray(payload["angles_rad"], dtype=float),
        intensity=np.asarray(payload["intensity"], dtype=float),
        angular_resolution=float(payload["angular_resolution_rad"]),
        provenance=payload.get("provenance", "file"),
        metadata=payload.get("metadata", {}),
    )


# ---------------------------------------------------------------------------
# Frame stacks


def write_frames_jsonl(path, frames: FrameSet) -> Path:
    """One JSON object of metadata, then one JSON integer array per
    frame.  Line-oriented so stacks can be streamed or truncated."""
    path = Path(path)
    with path.open("w") as fh:
        header = {"format": "gemscope-frames", "n_frames": frames.n_frames}
        header.update(jsonify(frames.metadata))
        fh.write(json.dumps(header) + "\n")
        for row in frames.counts:
            fh.write(json.dumps(row.tolist()) + "\n")
    return path


def read_frames_jsonl(path) -> FrameSet:
    path = Path(path)
    with path.open() as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "gemscope-frames":
            raise ValueError(f"{path} is not a frame stack")
        counts = [json.loads(line) for line in fh if line.strip()]
    metadata = {k: v for k, v in header.items() if k not in ("format", "n_frames")}
    arr = np.asarray(counts, dtype=np.int64)
    if arr.shape[0] != header["n_frames"]:
        raise ValueError(
            f"{path}: header promises {header['n_frames']} frames, found {arr.shape[0]}"
        )
    return FrameSet(counts=arr, metadata=metadata)


# ---------------------------------------------------------------------------
# Histograms and reports


def write_histogram_csv(path, angles: np.ndarray, counts: np.ndarray) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pixel", "angle_mrad", "counts"])
        for i, (a, c) in enumerate(zip(angles, counts)):
            writer.writerow([i, f"{a * _MRAD:.9g}", int(c)])
    return path


def write_report(path, report: dict) -> Path:
    """Analysis results as pretty-printed JSON."""
    path = Path(path)
    path.write_text(json.dumps(jsonify(report), indent=2, sort_keys=True) + "\n")
    return path


def write_rows_csv(path, header: list, rows: list) -> Path:
    """Plain CSV table, one list per row (plotting mirror of a report)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(jsonify(list(row)))
    return path
