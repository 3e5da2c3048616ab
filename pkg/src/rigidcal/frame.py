"""Common-frame construction and multi-tool calibration.

Every tool touches the same board dots in the same order and then holds a
point above the board. Per tool we fit a consensus plane to the touched dots,
orient its normal toward the above point, take the inlier centroid as origin
and the first touched dot as the x direction; that frame is the shared board
frame expressed in tool coordinates, and inverting it gives the tool-to-common
transform. Pairwise transforms follow by composition, and each is
cross-checked against an independent correspondence-based registration of the
raw dot lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import (
    AmbiguousAxis,
    CalibrationError,
    DegenerateInput,
    OrderMismatch,
    UnknownTool,
)
from .geom import Point3, RigidTransform, points_to_array
from .registration import PlaneFit, RansacParams, kabsch_register, ransac_plane

ToolId = str

AXIS_TOL = 1e-9


@dataclass(frozen=True)
class MeasurementSet:
    """One tool's ordered observations: the touched dots, then the above point."""

    tool: ToolId
    dot_points: tuple[Point3, ...]
    above_point: Point3

    def __post_init__(self) -> None:
        object.__setattr__(self, "dot_points", tuple(self.dot_points))
        if not self.tool:
            raise ValueError("tool id must be nonempty")
        if len(self.dot_points) < 3:
            raise ValueError(f"need at least 3 dot points, got {len(self.dot_points)}")


@dataclass(frozen=True)
class CommonFrame:
    tool: ToolId
    tool_to_common: RigidTransform
    plane_fit: PlaneFit
    origin: Point3


@dataclass(frozen=True)
class CrossCheck:
    """Disagreement between the frame-based and registration-based transform
    for one tool pair: worst displacement of a measured dot mapped by the two
    transforms (meters) and the geodesic angle between their rotations."""

    translation_m: float
    rotation_rad: float


@dataclass(frozen=True)
class CalibrationResult:
    frames: dict[ToolId, CommonFrame]
    residuals: dict[ToolId, float]
    cross_check: dict[tuple[ToolId, ToolId], CrossCheck]

    def tools(self) -> list[ToolId]:
        return sorted(self.frames)


def build_common_frame(m: MeasurementSet, params: RansacParams) -> CommonFrame:
    """Construct the shared board frame seen from one tool.

    Steps: consensus plane over the dots; normal flipped toward the above
    point; origin at the inlier-dot centroid; x along the in-plane projection
    of the first dot; y completes a right-handed frame.
    """
    fit = ransac_plane(m.dot_points, params)
    pts = points_to_array(m.dot_points)
    origin = pts[list(fit.inliers)].mean(axis=0)

    plane = fit.plane
    normal = plane.normal.to_array()
    toward_above = m.above_point.to_array() - origin
    side = float(normal @ toward_above)
    if side == 0.0:
        raise DegenerateInput("above point lies on the board plane")
    if side < 0.0:
        plane = plane.flipped()
        normal = -normal

    first = pts[0] - origin
    x_axis = first - (first @ normal) * normal
    x_norm = float(np.linalg.norm(x_axis))
    if x_norm < AXIS_TOL:
        raise AmbiguousAxis("first dot projects onto the frame origin")
    x_axis = x_axis / x_norm
    y_axis = np.cross(normal, x_axis)

    # columns are the frame axes in tool coordinates: maps common -> tool
    axes = np.column_stack([x_axis, y_axis, normal])
    tool_to_common = RigidTransform.from_rotation_translation(axes, origin).invert()
    oriented_fit = PlaneFit(plane=plane, inliers=fit.inliers, rms_residual=fit.rms_residual)
    return CommonFrame(
        tool=m.tool,
        tool_to_common=tool_to_common,
        plane_fit=oriented_fit,
        origin=Point3.from_array(origin),
    )


def _pair_transform(frames: dict[ToolId, CommonFrame], a: ToolId, b: ToolId) -> RigidTransform:
    return frames[b].tool_to_common.invert().compose(frames[a].tool_to_common)


def _cross_check(
    frame_based: RigidTransform, dots_a: Sequence[Point3], dots_b: Sequence[Point3]
) -> CrossCheck:
    registered = kabsch_register(dots_a, dots_b)
    pts = points_to_array(dots_a)
    gap = frame_based.apply_array(pts) - registered.apply_array(pts)
    worst = float(np.max(np.linalg.norm(gap, axis=1)))
    angle = frame_based.rotation.angle_to(registered.rotation)
    return CrossCheck(translation_m=worst, rotation_rad=angle)


def calibrate(measurements: Sequence[MeasurementSet], params: RansacParams) -> CalibrationResult:
    """Build one common frame per tool and every pairwise transform.

    All measurement sets must list the same number of dots in the shared touch
    order. Frame errors are re-raised tagged with the offending tool. The
    cross-check compares each frame-based pair transform with an independent
    correspondence-based registration of the same dot lists.
    """
    if len(measurements) < 2:
        raise ValueError(f"need at least 2 measurement sets, got {len(measurements)}")
    tools = [m.tool for m in measurements]
    if len(set(tools)) != len(tools):
        raise ValueError(f"duplicate tool ids in {tools}")
    counts = {m.tool: len(m.dot_points) for m in measurements}
    if len(set(counts.values())) != 1:
        raise OrderMismatch(f"dot counts differ across tools: {counts}")

    frames: dict[ToolId, CommonFrame] = {}
    for m in measurements:
        try:
            frames[m.tool] = build_common_frame(m, params)
        except CalibrationError as exc:
            raise type(exc)(f"tool {m.tool}: {exc}") from exc

    dots = {m.tool: m.dot_points for m in measurements}
    residuals = {t: frames[t].plane_fit.rms_residual for t in frames}
    cross = {
        (a, b): _cross_check(_pair_transform(frames, a, b), dots[a], dots[b])
        for a, b in permutations(sorted(frames), 2)
    }
    return CalibrationResult(frames=frames, residuals=residuals, cross_check=cross)


def tool_to_tool(r: CalibrationResult, a: ToolId, b: ToolId) -> RigidTransform:
    """Transform taking coordinates in tool ``a``'s frame to tool ``b``'s frame."""
    for t in (a, b):
        if t not in r.frames:
            raise UnknownTool(f"tool {t!r} not in calibration (has {sorted(r.frames)})")
    return _pair_transform(r.frames, a, b)
