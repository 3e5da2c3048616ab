"""Rigid-motion algebra on 3D points.

Conventions used throughout the package:

- lengths are meters;
- quaternions are Hamilton ``(w, x, y, z)``, stored unit-norm with a canonical
  sign (``w > 0``, or the first nonzero of ``x, y, z`` positive when ``w == 0``)
  so that ``q`` and ``-q`` collapse to one representative;
- ``RigidTransform`` maps a point as ``R @ p + t`` and carries no scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Point3:
    """A 3D point (or free vector) with finite components, in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"point components must be finite, got ({self.x}, {self.y}, {self.z})")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a: Iterable[float]) -> "Point3":
        ax, ay, az = (float(v) for v in a)
        return cls(ax, ay, az)

    def distance_to(self, other: "Point3") -> float:
        return math.sqrt((self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2)


def points_to_array(points: Sequence[Point3]) -> np.ndarray:
    """Stack points into an (N, 3) float array."""
    return np.array([[p.x, p.y, p.z] for p in points], dtype=float).reshape(-1, 3)


def array_to_points(arr: np.ndarray) -> list[Point3]:
    return [Point3(float(r[0]), float(r[1]), float(r[2])) for r in np.asarray(arr, dtype=float).reshape(-1, 3)]


def _hamilton(a: tuple[float, float, float, float], b: tuple[float, float, float, float]):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


@dataclass(frozen=True)
class UnitQuaternion:
    """Unit quaternion with canonical sign; the construction normalizes and
    flips sign, so equal rotations compare equal field-wise."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        comps = (self.w, self.x, self.y, self.z)
        if not all(math.isfinite(c) for c in comps):
            raise ValueError("quaternion components must be finite")
        norm = math.sqrt(sum(c * c for c in comps))
        if abs(norm - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"quaternion norm {norm!r} deviates from 1 by more than {UNIT_NORM_TOL}")
        w, x, y, z = (c / norm for c in comps)
        for c in (w, x, y, z):
            if c != 0.0:
                if c < 0.0:
                    w, x, y, z = -w, -x, -y, -z
                break
        # +0.0 addition folds any -0.0 into +0.0 so equality stays canonical
        object.__setattr__(self, "w", w + 0.0)
        object.__setattr__(self, "x", x + 0.0)
        object.__setattr__(self, "y", y + 0.0)
        object.__setattr__(self, "z", z + 0.0)

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_axis_angle(cls, axis: Iterable[float], angle: float) -> "UnitQuaternion":
        ax = np.asarray(tuple(axis), dtype=float)
        n = float(np.linalg.norm(ax))
        if n == 0.0:
            raise ValueError("rotation axis must be nonzero")
        ax = ax / n
        half = 0.5 * angle
        s = math.sin(half)
        return cls(math.cos(half), s * ax[0], s * ax[1], s * ax[2])

    @classmethod
    def from_rotation_matrix(cls, m: np.ndarray) -> "UnitQuaternion":
        m = np.asarray(m, dtype=float)
        t = m[0, 0] + m[1, 1] + m[2, 2]
        if t > 0.0:
            s = math.sqrt(t + 1.0) * 2.0
            w, x, y, z = 0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s
        elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            w, x, y, z = (m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s
        elif m[1, 1] >= m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            w, x, y, z = (m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            w, x, y, z = (m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s
        norm = math.sqrt(w * w + x * x + y * y + z * z)
        return cls(w / norm, x / norm, y / norm, z / norm)

    def __mul__(self, other: "UnitQuaternion") -> "UnitQuaternion":
        w, x, y, z = _hamilton((self.w, self.x, self.y, self.z), (other.w, other.x, other.y, other.z))
        return UnitQuaternion(w, x, y, z)

    def conjugate(self) -> "UnitQuaternion":
        return UnitQuaternion(self.w, -self.x, -self.y, -self.z)

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ],
            dtype=float,
        )

    def rotate(self, v: np.ndarray) -> np.ndarray:
        """Rotate a 3-vector (or (N, 3) stack of vectors)."""
        v = np.asarray(v, dtype=float)
        q = np.array([self.x, self.y, self.z])
        t = 2.0 * np.cross(q, v)
        return v + self.w * t + np.cross(q, t)

    def angle_to(self, other: "UnitQuaternion") -> float:
        """Geodesic angle (radians) between the two rotations; exact near zero."""
        w, x, y, z = _hamilton((self.w, -self.x, -self.y, -self.z), (other.w, other.x, other.y, other.z))
        return 2.0 * math.atan2(math.sqrt(x * x + y * y + z * z), abs(w))


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion ``p -> R @ p + t`` (rotation + translation, no scale)."""

    rotation: UnitQuaternion
    translation: Point3

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(UnitQuaternion.identity(), Point3(0.0, 0.0, 0.0))

    @classmethod
    def from_rotation_translation(cls, r: np.ndarray, t: Iterable[float]) -> "RigidTransform":
        return cls(UnitQuaternion.from_rotation_matrix(r), Point3.from_array(t))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """Transform equal to applying ``other`` first, then ``self``."""
        rot = self.rotation * other.rotation
        return RigidTransform(rot, self.apply(other.translation))

    def invert(self) -> "RigidTransform":
        rot = self.rotation.conjugate()
        t = -rot.rotate(self.translation.to_array())
        return RigidTransform(rot, Point3.from_array(t))

    def apply(self, p: Point3) -> Point3:
        return Point3.from_array(self.rotation.rotate(p.to_array()) + self.translation.to_array())

    def apply_array(self, pts: np.ndarray) -> np.ndarray:
        """Apply to an (N, 3) array of points."""
        pts = np.asarray(pts, dtype=float)
        return pts @ self.rotation.rotation_matrix().T + self.translation.to_array()

    def apply_points(self, points: Sequence[Point3]) -> list[Point3]:
        return array_to_points(self.apply_array(points_to_array(points)))

    def translation_array(self) -> np.ndarray:
        return self.translation.to_array()


def translation_distance(a: RigidTransform, b: RigidTransform) -> float:
    """Euclidean distance between the two translation components, meters."""
    return a.translation.distance_to(b.translation)


def rotation_distance(a: RigidTransform, b: RigidTransform) -> float:
    """Geodesic angle between the two rotation components, radians."""
    return a.rotation.angle_to(b.rotation)
