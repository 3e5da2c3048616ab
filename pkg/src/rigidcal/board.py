"""Calibration-board model: a central marker surrounded by touch dots on a
known-radius circle, plus one reference point held above the board that fixes
the plane-normal direction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .geom import Point3, RigidTransform

_TWO_PI = 2.0 * math.pi
_ANGLE_TOL = 1e-9


def _circular_delta(a: float, b: float) -> float:
    """Signed angular difference a-b wrapped to (-pi, pi]."""
    d = math.fmod(a - b, _TWO_PI)
    if d <= -math.pi:
        d += _TWO_PI
    elif d > math.pi:
        d -= _TWO_PI
    return d


@dataclass(frozen=True)
class BoardModel:
    """Dot layout in the marker frame.

    Dots sit at ``(radius*cos(a), radius*sin(a), 0)`` for each angle; the
    above-board point sits at ``(0, 0, above_height)``. The angle set must be
    symmetric about the center (every angle has its antipode) so the dot
    centroid coincides with the marker center.
    """

    radius: float = 0.05
    dot_angles: tuple[float, ...] = field(
        default=(0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
    )
    above_height: float = 0.05

    def __post_init__(self) -> None:
        object.__setattr__(self, "dot_angles", tuple(float(a) for a in self.dot_angles))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.above_height <= 0:
            raise ValueError("above_height must be positive")
        if len(self.dot_angles) < 3:
            raise ValueError(f"need at least 3 dots, got {len(self.dot_angles)}")
        angles = self.dot_angles
        for i, a in enumerate(angles):
            for b in angles[i + 1 :]:
                if abs(_circular_delta(a, b)) <= _ANGLE_TOL:
                    raise ValueError(f"dot angles must be pairwise distinct, {a} repeats")
        for a in angles:
            if not any(abs(_circular_delta(a + math.pi, b)) <= _ANGLE_TOL for b in angles):
                raise ValueError(f"dot layout is not symmetric: angle {a} rad lacks its antipode")

    def to_dict(self) -> dict:
        return {
            "radius_m": self.radius,
            "dot_angles_deg": [math.degrees(a) for a in self.dot_angles],
            "above_height_m": self.above_height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoardModel":
        return cls(
            radius=float(d["radius_m"]),
            dot_angles=tuple(math.radians(float(a)) for a in d["dot_angles_deg"]),
            above_height=float(d["above_height_m"]),
        )


@dataclass(frozen=True)
class MarkerPose:
    """Pose of the board marker in the camera frame (marker -> camera)."""

    pose: RigidTransform


def board_points_marker_frame(board: BoardModel) -> list[Point3]:
    """Ordered reference points in the marker frame: dots in angle order, the
    above-board point last. This order is the correspondence key every tool's
    touch sequence must follow."""
    pts = [
        Point3(board.radius * math.cos(a), board.radius * math.sin(a), 0.0)
        for a in board.dot_angles
    ]
    pts.append(Point3(0.0, 0.0, board.above_height))
    return pts


def board_points_camera_frame(marker: MarkerPose, board: BoardModel) -> list[Point3]:
    """The same ordered points mapped into the camera frame via the marker pose."""
    return [marker.pose.apply(p) for p in board_points_marker_frame(board)]
