"""rigidcal: reconstruct a common reference frame shared by several robot
arms and a depth camera from touched points on a calibration board, and
validate the result on synthetic grasp / dual-arm benchmarks."""

from .board import BoardModel, MarkerPose, board_points_camera_frame, board_points_marker_frame
from .frame import (
    CalibrationResult,
    CommonFrame,
    CrossCheck,
    MeasurementSet,
    ToolId,
    build_common_frame,
    calibrate,
    tool_to_tool,
)
from .geom import Point3, RigidTransform, UnitQuaternion, rotation_distance, translation_distance
from .metrics import (
    DeviationRow,
    ErrorStats,
    TrajectoryDeviation,
    decompose_error,
    error_stats,
    plane_consistency_check,
    trajectory_deviation,
)
from .registration import (
    Plane,
    PlaneFit,
    RansacParams,
    centroid,
    fit_plane_least_squares,
    kabsch_register,
    ransac_plane,
)
from .sim import (
    GraspTrial,
    GroundTruthScene,
    NoiseModel,
    TrajectoryTrial,
    make_scene,
    run_grasp_experiment,
    run_trajectory_experiment,
    simulate_measurements,
)

__version__ = "0.1.0"

__all__ = [
    "BoardModel",
    "CalibrationResult",
    "CommonFrame",
    "CrossCheck",
    "DeviationRow",
    "ErrorStats",
    "GraspTrial",
    "GroundTruthScene",
    "MarkerPose",
    "MeasurementSet",
    "NoiseModel",
    "Plane",
    "PlaneFit",
    "Point3",
    "RansacParams",
    "RigidTransform",
    "ToolId",
    "TrajectoryDeviation",
    "TrajectoryTrial",
    "UnitQuaternion",
    "board_points_camera_frame",
    "board_points_marker_frame",
    "build_common_frame",
    "calibrate",
    "centroid",
    "decompose_error",
    "error_stats",
    "fit_plane_least_squares",
    "kabsch_register",
    "make_scene",
    "plane_consistency_check",
    "ransac_plane",
    "rotation_distance",
    "run_grasp_experiment",
    "run_trajectory_experiment",
    "simulate_measurements",
    "tool_to_tool",
    "trajectory_deviation",
    "translation_distance",
]
