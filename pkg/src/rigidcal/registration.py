"""Robust plane estimation and closed-form rigid point-set registration.

Plane fitting is total least squares (orthogonal distances) via the
eigen-decomposition of the point covariance; the consensus search draws
minimal 3-point samples from a seeded generator so results are exactly
reproducible. Registration is the SVD-based closed form with the usual
determinant correction so a proper rotation always comes out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, EmptyInput, InsufficientInliers, LengthMismatch
from .geom import Point3, RigidTransform, points_to_array

# ratio of the middle to the largest covariance eigenvalue below which the
# points are treated as collinear (they no longer span a plane)
COLLINEARITY_EIGENRATIO = 1e-12

# minimal-sample rejection: sine of the angle between the two spanning edges
MIN_SAMPLE_SIN = 1e-9


@dataclass(frozen=True)
class Plane:
    """Oriented plane ``normal . p + offset = 0`` with a unit normal."""

    normal: Point3
    offset: float

    def __post_init__(self) -> None:
        n = self.normal.to_array()
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-9:
            raise ValueError("plane normal must be a unit vector")

    def signed_distance(self, p: Point3) -> float:
        return float(self.normal.to_array() @ p.to_array() + self.offset)

    def distances(self, pts: np.ndarray) -> np.ndarray:
        """Absolute point-to-plane distances for an (N, 3) array."""
        return np.abs(np.asarray(pts, dtype=float) @ self.normal.to_array() + self.offset)

    def flipped(self) -> "Plane":
        n = self.normal
        return Plane(Point3(-n.x, -n.y, -n.z), -self.offset)


@dataclass(frozen=True)
class RansacParams:
    """Consensus-search knobs; defaults sized for millimeter-level touch noise."""

    inlier_threshold: float = 0.001  # meters
    max_iterations: int = 500
    min_inliers: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.inlier_threshold <= 0:
            raise ValueError("inlier_threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.min_inliers < 3:
            raise ValueError("min_inliers must be at least 3")


@dataclass(frozen=True)
class PlaneFit:
    plane: Plane
    inliers: tuple[int, ...]
    rms_residual: float


def centroid(points: Sequence[Point3]) -> Point3:
    """Component-wise arithmetic mean."""
    if len(points) == 0:
        raise EmptyInput("centroid of zero points")
    return Point3.from_array(points_to_array(points).mean(axis=0))


def _oriented(normal: np.ndarray) -> np.ndarray:
    # default sign: positive z, falling back to y then x on exact zeros
    if normal[2] < 0:
        return -normal
    if normal[2] == 0:
        if normal[1] < 0:
            return -normal
        if normal[1] == 0 and normal[0] < 0:
            return -normal
    return normal


def fit_plane_least_squares(points: Sequence[Point3]) -> Plane:
    """Plane minimizing the sum of squared orthogonal distances.

    Raises DegenerateInput when fewer than three points are given or when the
    points are collinear (middle/largest covariance eigenvalue ratio below
    ``COLLINEARITY_EIGENRATIO``).
    """
    if len(points) < 3:
        raise DegenerateInput(f"plane fit needs at least 3 points, got {len(points)}")
    pts = points_to_array(points)
    center = pts.mean(axis=0)
    centered = pts - center
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)  # ascending eigenvalues
    if evals[2] <= 0.0 or evals[1] <= COLLINEARITY_EIGENRATIO * evals[2]:
        raise DegenerateInput("points are collinear or coincident; no unique plane")
    normal = _oriented(evecs[:, 0])
    offset = -float(normal @ center)
    return Plane(Point3.from_array(normal), offset)


def _minimal_sample_planes(pts: np.ndarray, samples: np.ndarray):
    """Planes through each 3-point sample. Returns (normals, offsets, valid)."""
    a = pts[samples[:, 0]]
    e1 = pts[samples[:, 1]] - a
    e2 = pts[samples[:, 2]] - a
    n = np.cross(e1, e2)
    nn = np.linalg.norm(n, axis=1)
    l1 = np.linalg.norm(e1, axis=1)
    l2 = np.linalg.norm(e2, axis=1)
    span = l1 * l2
    with np.errstate(invalid="ignore", divide="ignore"):
        sin_angle = np.where(span > 0, nn / np.where(span > 0, span, 1.0), 0.0)
    valid = sin_angle > MIN_SAMPLE_SIN
    normals = np.zeros_like(n)
    normals[valid] = n[valid] / nn[valid, None]
    offsets = -np.einsum("ij,ij->i", normals, a)
    return normals, offsets, valid


def ransac_plane(points: Sequence[Point3], params: RansacParams) -> PlaneFit:
    """Consensus plane: best minimal-sample model by inlier count, ties broken
    by lower inlier RMS and then by earlier iteration, refit on its inliers.

    Deterministic for a given seed. The returned inlier set and RMS are taken
    against the refit plane, so every reported inlier is within threshold.
    """
    n_points = len(points)
    if n_points < params.min_inliers:
        raise InsufficientInliers(f"{n_points} points cannot yield {params.min_inliers} inliers")
    pts = points_to_array(points)

    rng = np.random.default_rng(params.seed)
    # first three columns of seeded random permutations: 3 distinct indices
    # per iteration, drawn without replacement
    samples = np.argsort(rng.random((params.max_iterations, n_points)), axis=1)[:, :3]
    normals, offsets, valid = _minimal_sample_planes(pts, samples)
    if not valid.any():
        raise DegenerateInput("no 3-point sample spans a plane")

    dists = np.abs(pts @ normals.T + offsets)  # (n_points, iterations)
    inlier_mask = (dists <= params.inlier_threshold) & valid
    counts = inlier_mask.sum(axis=0)
    sq = np.where(inlier_mask, dists**2, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        rms = np.where(counts > 0, np.sqrt(sq / np.maximum(counts, 1)), np.inf)

    order = np.lexsort((np.arange(params.max_iterations), rms, -counts))
    best = int(order[0])
    if int(counts[best]) < params.min_inliers:
        raise InsufficientInliers(
            f"best consensus has {int(counts[best])} inliers, need {params.min_inliers}"
        )

    model_inliers = np.flatnonzero(inlier_mask[:, best])
    plane = fit_plane_least_squares([points[i] for i in model_inliers])
    final_inliers = np.flatnonzero(plane.distances(pts) <= params.inlier_threshold)
    if len(final_inliers) < params.min_inliers:
        raise InsufficientInliers(
            f"refit plane keeps {len(final_inliers)} inliers, need {params.min_inliers}"
        )
    final_rms = float(np.sqrt(np.mean(plane.distances(pts[final_inliers]) ** 2)))
    return PlaneFit(plane=plane, inliers=tuple(int(i) for i in final_inliers), rms_residual=final_rms)


def kabsch_register(src: Sequence[Point3], dst: Sequence[Point3]) -> RigidTransform:
    """Least-squares rigid transform T with ``T(src_i) ~ dst_i``.

    Closed form via SVD of the cross-covariance; a reflection in the solution
    is corrected by flipping the smallest singular direction so the rotation
    is always proper (det +1).
    """
    if len(src) != len(dst):
        raise LengthMismatch(f"src has {len(src)} points, dst has {len(dst)}")
    if len(src) < 3:
        raise DegenerateInput("registration needs at least 3 point pairs")
    p = points_to_array(src)
    q = points_to_array(dst)
    cp = p.mean(axis=0)
    cq = q.mean(axis=0)
    p0 = p - cp
    q0 = q - cq

    evals = np.linalg.eigvalsh(p0.T @ p0)
    if evals[2] <= 0.0 or evals[1] <= COLLINEARITY_EIGENRATIO * evals[2]:
        raise DegenerateInput("source points are collinear; rotation is not unique")

    u, _, vt = np.linalg.svd(p0.T @ q0)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = cq - r @ cp
    return RigidTransform.from_rotation_translation(r, t)


def registration_rms(t: RigidTransform, src: Sequence[Point3], dst: Sequence[Point3]) -> float:
    """RMS of ``|T(src_i) - dst_i|``; handy for optimality checks."""
    if len(src) != len(dst):
        raise LengthMismatch(f"src has {len(src)} points, dst has {len(dst)}")
    diff = t.apply_array(points_to_array(src)) - points_to_array(dst)
    return float(np.sqrt(np.mean(np.sum(diff**2, axis=1))))
