"""Error statistics, quadrature error decomposition, and report emission.

Statistics are reported in millimeters (the package computes in meters and
converts at this boundary). Standard deviations use the sample (n-1)
denominator throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import math

import numpy as np

from .errors import EmptyInput, InvalidDecomposition, LengthMismatch
from .geom import Point3, points_to_array

MM_PER_M = 1000.0


@dataclass(frozen=True)
class ErrorStats:
    """Mean / sample std / max of a batch of scalar errors, millimeters."""

    mean: float
    std: float
    max: float
    n: int


@dataclass(frozen=True)
class DeviationRow:
    radius_mm: float
    std_mm: float
    max_dev_mm: float


@dataclass(frozen=True)
class TrajectoryDeviation:
    """Spread of the per-waypoint gap between two executed trajectories."""

    mean_mm: float
    std_mm: float
    max_dev_mm: float


def error_stats(errors_mm: Sequence[float]) -> ErrorStats:
    if len(errors_mm) == 0:
        raise EmptyInput("no errors to summarize")
    arr = np.asarray(errors_mm, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return ErrorStats(mean=float(arr.mean()), std=std, max=float(arr.max()), n=int(arr.size))


def decompose_error(total_mm: float, intrinsic_mm: float) -> float:
    """Split off an independent error source in quadrature:
    sqrt(total^2 - intrinsic^2)."""
    if intrinsic_mm < 0.0 or total_mm < intrinsic_mm:
        raise InvalidDecomposition(f"need total >= intrinsic >= 0, got {total_mm}, {intrinsic_mm}")
    return math.sqrt(total_mm * total_mm - intrinsic_mm * intrinsic_mm)


def trajectory_deviation(a: Sequence[Point3], b: Sequence[Point3]) -> TrajectoryDeviation:
    """Spread of the waypoint-wise distances between two trajectories.

    A constant offset between the trajectories contributes nothing: std is the
    sample std of the distances and max_dev the largest absolute deviation of
    a distance from their mean.
    """
    if len(a) != len(b):
        raise LengthMismatch(f"trajectories have {len(a)} and {len(b)} waypoints")
    if len(a) < 2:
        raise ValueError("need at least 2 waypoints")
    d = np.linalg.norm(points_to_array(a) - points_to_array(b), axis=1) * MM_PER_M
    mean = float(d.mean())
    return TrajectoryDeviation(
        mean_mm=mean,
        std_mm=float(d.std(ddof=1)),
        max_dev_mm=float(np.max(np.abs(d - mean))),
    )


def plane_consistency_check(poses_a: Sequence[Point3], poses_b: Sequence[Point3]) -> ErrorStats:
    """Stats of the pairwise distances between matched pose lists, millimeters."""
    if len(poses_a) != len(poses_b):
        raise LengthMismatch(f"pose lists have {len(poses_a)} and {len(poses_b)} entries")
    d = np.linalg.norm(points_to_array(poses_a) - points_to_array(poses_b), axis=1) * MM_PER_M
    return error_stats(d.tolist())


# --- report emission ---------------------------------------------------------

GRASP_TABLE_HEADER = ["tool", "x_mm", "y_mm", "z_mm", "error_mm"]
DEVIATION_TABLE_HEADER = ["radius_mm", "std_mm", "maxdev_mm"]


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def _write_rows(path: Path, header: list[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_grasp_table(path: str | Path, rows: Iterable[Sequence]) -> None:
    """Rows are (tool, x_mm, y_mm, z_mm, error_mm) per reached grasp point."""
    _write_rows(Path(path), GRASP_TABLE_HEADER, rows)


def write_deviation_table(path: str | Path, rows: Iterable[DeviationRow]) -> None:
    _write_rows(
        Path(path),
        DEVIATION_TABLE_HEADER,
        ((r.radius_mm, r.std_mm, r.max_dev_mm) for r in rows),
    )


def write_waypoint_series(
    path: str | Path,
    reference: Sequence[Point3],
    executed: dict[str, Sequence[Point3]],
) -> None:
    """Plot data for one radius: reference waypoints plus each tool's executed
    trajectory, all in the common frame, millimeters."""
    tools = sorted(executed)
    header = ["index", "ref_x_mm", "ref_y_mm", "ref_z_mm"]
    for t in tools:
        header += [f"{t}_x_mm", f"{t}_y_mm", f"{t}_z_mm"]
    rows = []
    for i, ref in enumerate(reference):
        row = [i, ref.x * MM_PER_M, ref.y * MM_PER_M, ref.z * MM_PER_M]
        for t in tools:
            p = executed[t][i]
            row += [p.x * MM_PER_M, p.y * MM_PER_M, p.z * MM_PER_M]
        rows.append(row)
    _write_rows(Path(path), header, rows)
