"""Synthetic desk-scale scenes with ground truth, plus the two validation
experiments the toolkit is judged by.

A scene places a camera and robot arms above a calibration board; ground-truth
poses make the board frame the true common frame, so every estimated transform
can be compared against an exact oracle. Measurement noise is isotropic
Gaussian with a workspace term: a point observed at ``p`` in a tool's frame
gets std ``sigma0 + k * |p|``, so error grows as an arm reaches away from its
base.

Grasp experiment: the camera localizes two grasp targets on a ring, the
targets are mapped through the estimated calibration into each arm's frame,
and the arm reaches them with kinematic noise. The recorded error is the
physical distance between the point the arm actually reached and the physical
location of the camera's estimate, i.e. exactly the calibration chain error
plus the arm's own imprecision.

Trajectory experiment: both arms execute the same circle (precomputed in the
common frame, x-z plane, all radii sharing the first waypoint); each waypoint
is mapped into the arm frame with the estimated calibration, executed with
kinematic noise, and the physically reached points are expressed back in the
true common frame. The waypoint-wise gap between the two arms then reflects
calibration disagreement plus kinematic noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .board import BoardModel, board_points_marker_frame
from .errors import UnknownTool
from .frame import CalibrationResult, MeasurementSet, ToolId
from .geom import Point3, RigidTransform, UnitQuaternion, array_to_points, points_to_array

CAMERA_TOOL = "CAM"

# seed-stream tags so measurement, grasp, and trajectory draws never collide
_MEAS_STREAM = 0
_GRASP_STREAM = 1
_TRAJ_STREAM = 2

DEFAULT_KINEMATIC_SIGMA = 0.00102  # meters; arm positioning precision
DEFAULT_RING_DIAMETER = 0.015
DEFAULT_RADII = (0.01, 0.02, 0.03, 0.04, 0.05)

# ring placements on the work surface: center, edge midpoints, corners
DEFAULT_RING_CENTERS = tuple(
    Point3(x, y, 0.01) for x in (-0.06, 0.0, 0.06) for y in (-0.06, 0.0, 0.06)
)


@dataclass(frozen=True)
class NoiseModel:
    """Isotropic Gaussian point noise: std = sigma0 + k * |p| (p in tool frame)."""

    sigma0: float = 0.0  # meters
    k: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma0 < 0 or self.k < 0:
            raise ValueError("sigma0 and k must be nonnegative")

    def sigma_at(self, p: np.ndarray) -> float:
        return self.sigma0 + self.k * float(np.linalg.norm(p))


@dataclass(frozen=True)
class GroundTruthScene:
    true_poses: dict[ToolId, RigidTransform]  # tool frame -> world
    board_pose: RigidTransform  # board/marker frame -> world
    board: BoardModel


@dataclass(frozen=True)
class GraspTrial:
    """One ring placement: true targets on the ring, the points each arm
    physically reached (common frame), and the reach-vs-camera-estimate
    errors in meters."""

    ring_center: Point3
    ring_diameter: float
    target_psm1: Point3
    target_psm2: Point3
    reached_psm1: Point3
    reached_psm2: Point3
    error_psm1: float
    error_psm2: float

    def __post_init__(self) -> None:
        half = 0.5 * self.ring_diameter
        for t in (self.target_psm1, self.target_psm2):
            if abs(t.distance_to(self.ring_center) - half) > 1e-9:
                raise ValueError("grasp targets must lie on the ring")


@dataclass(frozen=True)
class TrajectoryTrial:
    radius: float
    waypoints: tuple[Point3, ...]
    executed: dict[ToolId, tuple[Point3, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        object.__setattr__(
            self, "executed", {t: tuple(pts) for t, pts in self.executed.items()}
        )
        for t, pts in self.executed.items():
            if len(pts) != len(self.waypoints):
                raise ValueError(f"executed trajectory for {t} has wrong waypoint count")


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, stream, index)))


def _uniform_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    v = rng.normal(size=4)
    v = v / np.linalg.norm(v)
    return UnitQuaternion(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


def default_tool_names(n_tools: int) -> list[ToolId]:
    return [CAMERA_TOOL] + [f"PSM{i}" for i in range(1, n_tools)]


def make_scene(
    seed: int,
    n_tools: int = 3,
    board: BoardModel | None = None,
    tool_names: Sequence[ToolId] | None = None,
) -> GroundTruthScene:
    """Deterministic random scene: tools in a 0.3 m cube above the board, the
    board nearly flat below them with a random heading and a small tilt."""
    if n_tools < 2:
        raise ValueError("need at least 2 tools")
    board = board if board is not None else BoardModel()
    names = list(tool_names) if tool_names is not None else default_tool_names(n_tools)
    if len(names) != n_tools:
        raise ValueError(f"expected {n_tools} tool names, got {len(names)}")

    rng = np.random.default_rng(seed)
    yaw = UnitQuaternion.from_axis_angle((0.0, 0.0, 1.0), rng.uniform(0.0, 2.0 * math.pi))
    tilt_dir = rng.uniform(0.0, 2.0 * math.pi)
    tilt = UnitQuaternion.from_axis_angle(
        (math.cos(tilt_dir), math.sin(tilt_dir), 0.0), rng.uniform(0.0, 0.15)
    )
    board_t = Point3(rng.uniform(-0.03, 0.03), rng.uniform(-0.03, 0.03), rng.uniform(-0.01, 0.01))
    board_pose = RigidTransform(tilt * yaw, board_t)

    poses: dict[ToolId, RigidTransform] = {}
    for name in names:
        t = Point3(
            rng.uniform(-0.15, 0.15),
            rng.uniform(-0.15, 0.15),
            rng.uniform(0.10, 0.40),
        )
        poses[name] = RigidTransform(_uniform_quaternion(rng), t)
    return GroundTruthScene(true_poses=poses, board_pose=board_pose, board=board)


def scene_tool_points(scene: GroundTruthScene, tool: ToolId) -> tuple[list[Point3], Point3]:
    """Exact board reference points seen from one tool: (dots, above point)."""
    if tool not in scene.true_poses:
        raise UnknownTool(f"tool {tool!r} not in scene")
    world_to_tool = scene.true_poses[tool].invert()
    pts = [
        world_to_tool.apply(scene.board_pose.apply(p))
        for p in board_points_marker_frame(scene.board)
    ]
    return pts[:-1], pts[-1]


def simulate_measurements(scene: GroundTruthScene, noise: NoiseModel) -> list[MeasurementSet]:
    """Noisy touch measurements for every tool, in the scene's tool order."""
    out = []
    for idx, tool in enumerate(scene.true_poses):
        rng = _rng(noise.seed, _MEAS_STREAM, idx)
        dots, above = scene_tool_points(scene, tool)
        noisy = []
        for p in dots + [above]:
            arr = p.to_array()
            noisy.append(Point3.from_array(arr + rng.normal(0.0, noise.sigma_at(arr), size=3)))
        out.append(MeasurementSet(tool=tool, dot_points=tuple(noisy[:-1]), above_point=noisy[-1]))
    return out


def _require_tools(calib: CalibrationResult, tools: Sequence[ToolId]) -> None:
    for t in tools:
        if t not in calib.frames:
            raise UnknownTool(f"tool {t!r} not in calibration (has {sorted(calib.frames)})")


def run_grasp_experiment(
    scene: GroundTruthScene,
    calib: CalibrationResult,
    ring_centers: Sequence[Point3] = DEFAULT_RING_CENTERS,
    noise: NoiseModel = NoiseModel(),
    *,
    ring_diameter: float = DEFAULT_RING_DIAMETER,
    kinematic_sigma: float = DEFAULT_KINEMATIC_SIGMA,
    repeats: int = 1,
) -> list[GraspTrial]:
    """Ring-grasp trials: two arms reach the camera-estimated ring extremes.

    ``noise`` perturbs the camera's observation of the targets; each arm's
    reach is additionally perturbed by isotropic ``kinematic_sigma``. The
    rightmost/leftmost grasp targets sit at ring_center +/- radius along the
    common-frame y axis. Trial errors compare the physically reached point
    with the physical location of the camera estimate.
    """
    _require_tools(calib, (CAMERA_TOOL, "PSM1", "PSM2"))
    cam_pose = scene.true_poses[CAMERA_TOOL]
    world_to_cam = cam_pose.invert()
    world_to_board = scene.board_pose.invert()
    cam_to_common = calib.frames[CAMERA_TOOL].tool_to_common

    trials = []
    trial_index = 0
    for _ in range(repeats):
        for center in ring_centers:
            rng = _rng(noise.seed, _GRASP_STREAM, trial_index)
            trial_index += 1
            half = 0.5 * ring_diameter
            targets = {
                "PSM1": center.to_array() + np.array([0.0, half, 0.0]),
                "PSM2": center.to_array() - np.array([0.0, half, 0.0]),
            }
            reached: dict[str, Point3] = {}
            errors: dict[str, float] = {}
            for psm in ("PSM1", "PSM2"):
                target_world = scene.board_pose.apply(Point3.from_array(targets[psm]))
                seen_cam = world_to_cam.apply(target_world).to_array()
                seen_cam = seen_cam + rng.normal(0.0, noise.sigma_at(seen_cam), size=3)
                estimate_common = cam_to_common.apply(Point3.from_array(seen_cam))
                command = (
                    calib.frames[psm]
                    .tool_to_common.invert()
                    .apply(estimate_common)
                    .to_array()
                )
                command = command + rng.normal(0.0, kinematic_sigma, size=3)
                reached_world = scene.true_poses[psm].apply(Point3.from_array(command))
                estimate_world = cam_pose.apply(Point3.from_array(seen_cam))
                errors[psm] = reached_world.distance_to(estimate_world)
                reached[psm] = world_to_board.apply(reached_world)
            trials.append(
                GraspTrial(
                    ring_center=center,
                    ring_diameter=ring_diameter,
                    target_psm1=Point3.from_array(targets["PSM1"]),
                    target_psm2=Point3.from_array(targets["PSM2"]),
                    reached_psm1=reached["PSM1"],
                    reached_psm2=reached["PSM2"],
                    error_psm1=errors["PSM1"],
                    error_psm2=errors["PSM2"],
                )
            )
    return trials


def circle_waypoints(radius: float, n_waypoints: int, start: Point3) -> list[Point3]:
    """Circle in the common-frame x-z plane through ``start``; the circle hangs
    below the start point (center = start - radius * z) so every radius shares
    the same first waypoint."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n_waypoints < 2:
        raise ValueError("need at least 2 waypoints")
    center = start.to_array() - np.array([0.0, 0.0, radius])
    phis = 0.5 * math.pi + 2.0 * math.pi * np.arange(n_waypoints) / n_waypoints
    pts = center[None, :] + radius * np.column_stack(
        [np.cos(phis), np.zeros_like(phis), np.sin(phis)]
    )
    return array_to_points(pts)


def run_trajectory_experiment(
    scene: GroundTruthScene,
    calib: CalibrationResult,
    radii: Sequence[float] = DEFAULT_RADII,
    noise: NoiseModel = NoiseModel(),
    *,
    tools: Sequence[ToolId] = ("PSM1", "PSM2"),
    n_waypoints: int = 100,
    start: Point3 = Point3(0.0, 0.0, 0.10),
) -> list[TrajectoryTrial]:
    """Simultaneous circles for each radius; ``noise`` is the arms' kinematic
    noise, evaluated at each commanded point in the arm's own frame so its
    workspace term grows when a circle reaches away from the base."""
    _require_tools(calib, tools)
    world_to_board = scene.board_pose.invert()

    trials = []
    for j, radius in enumerate(radii):
        rng = _rng(noise.seed, _TRAJ_STREAM, j)
        waypoints = circle_waypoints(radius, n_waypoints, start)
        executed: dict[ToolId, tuple[Point3, ...]] = {}
        for tool in tools:
            common_to_tool = calib.frames[tool].tool_to_common.invert()
            commands = common_to_tool.apply_array(points_to_array(waypoints))
            sigmas = noise.sigma0 + noise.k * np.linalg.norm(commands, axis=1)
            moved = commands + rng.normal(0.0, 1.0, size=commands.shape) * sigmas[:, None]
            world = scene.true_poses[tool].apply_array(moved)
            executed[tool] = tuple(array_to_points(world_to_board.apply_array(world)))
        trials.append(
            TrajectoryTrial(radius=radius, waypoints=tuple(waypoints), executed=executed)
        )
    return trials
