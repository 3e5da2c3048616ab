"""File formats: board descriptions, per-tool measurements, calibration
sessions, and persisted calibration results.

Measurement files are CSV (header ``x,y,z,kind`` with kind ``dot`` or
``above``, the above row last; units declared by the session) or JSON
(self-describing, with mandatory ``units``). Lengths in JSON keys carry an
explicit ``_m`` suffix and are meters; measurement coordinate values are in
the declared unit (``"m"`` or ``"mm"``). Calibration files store quaternions
in (w, x, y, z) order and translations in meters.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .board import BoardModel
from .errors import DegenerateInput, ParseError, UnknownTool
from .frame import CalibrationResult, CrossCheck, MeasurementSet, ToolId, tool_to_tool
from .geom import Point3, RigidTransform, UnitQuaternion
from .registration import RansacParams

UNIT_SCALES = {"m": 1.0, "mm": 0.001}
QUATERNION_ORDER = "wxyz"
DEFAULT_WARN_CROSS_CHECK_MM = 2.0


def unit_scale(units) -> float:
    if units not in UNIT_SCALES:
        raise ParseError(f"units must be one of {sorted(UNIT_SCALES)}, got {units!r}")
    return UNIT_SCALES[units]


def read_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return data


def write_json(data: dict, path: str | Path) -> None:
    """Canonical JSON emission: sorted keys, 2-space indent, trailing newline.
    Re-running with identical inputs rewrites the file byte-identically."""
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- board files --------------------------------------------------------------


def load_board(path: str | Path) -> BoardModel:
    data = read_json(Path(path))
    try:
        return BoardModel.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad board description: {exc}") from exc


def save_board(board: BoardModel, path: str | Path) -> None:
    write_json(board.to_dict(), path)


# --- measurement files ---------------------------------------------------------


def _finish_measurement(tool, rows, path) -> MeasurementSet:
    if not rows:
        raise ParseError(f"{path}: no measurement rows")
    kinds = [k for _, k in rows]
    if kinds.count("above") != 1:
        raise ParseError(f"{path}: need exactly one 'above' row, got {kinds.count('above')}")
    if kinds[-1] != "above":
        raise ParseError(f"{path}: the 'above' row must be the final row")
    dots = [p for p, k in rows if k == "dot"]
    if len(dots) < 3:
        # a 2-dot file parses fine but cannot span a plane
        raise DegenerateInput(f"{path}: need at least 3 dot rows, got {len(dots)}")
    try:
        return MeasurementSet(tool=tool, dot_points=tuple(dots), above_point=rows[-1][0])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_measurement_csv(path: str | Path, tool: ToolId, units: str) -> MeasurementSet:
    """CSV with header ``x,y,z,kind``; kind is ``dot`` or ``above``."""
    path = Path(path)
    scale = unit_scale(units)
    rows: list[tuple[Point3, str]] = []
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x", "y", "z", "kind"]:
                raise ParseError(f"{path}: expected header 'x,y,z,kind', got {reader.fieldnames}")
            for lineno, rec in enumerate(reader, start=2):
                try:
                    p = Point3(float(rec["x"]) * scale, float(rec["y"]) * scale, float(rec["z"]) * scale)
                except (TypeError, ValueError) as exc:
                    raise ParseError(f"{path}:{lineno}: bad coordinates: {exc}") from exc
                kind = (rec["kind"] or "").strip()
                if kind not in ("dot", "above"):
                    raise ParseError(f"{path}:{lineno}: kind must be 'dot' or 'above', got {kind!r}")
                rows.append((p, kind))
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return _finish_measurement(tool, rows, path)


def load_measurement_json(path: str | Path) -> MeasurementSet:
    """JSON measurement file: ``{"tool": ..., "units": "m"|"mm", "points":
    [{"x":..., "y":..., "z":..., "kind": "dot"|"above"}, ...]}``."""
    path = Path(path)
    data = read_json(path)
    for key in ("tool", "units", "points"):
        if key not in data:
            raise ParseError(f"{path}: missing key {key!r}")
    scale = unit_scale(data["units"])
    rows: list[tuple[Point3, str]] = []
    for i, rec in enumerate(data["points"]):
        try:
            p = Point3(float(rec["x"]) * scale, float(rec["y"]) * scale, float(rec["z"]) * scale)
            kind = rec["kind"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: bad point #{i}: {exc}") from exc
        if kind not in ("dot", "above"):
            raise ParseError(f"{path}: point #{i}: kind must be 'dot' or 'above', got {kind!r}")
        rows.append((p, kind))
    return _finish_measurement(str(data["tool"]), rows, path)


def save_measurement_csv(m: MeasurementSet, path: str | Path, units: str = "mm") -> None:
    scale = 1.0 / unit_scale(units)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "kind"])
        for p in m.dot_points:
            writer.writerow([repr(p.x * scale), repr(p.y * scale), repr(p.z * scale), "dot"])
        a = m.above_point
        writer.writerow([repr(a.x * scale), repr(a.y * scale), repr(a.z * scale), "above"])


# --- session files --------------------------------------------------------------


@dataclass(frozen=True)
class Session:
    units: str
    measurements: tuple[tuple[ToolId, Path], ...]  # (tool, file path)
    ransac: RansacParams
    board: BoardModel | None
    warn_cross_check_mm: float


def parse_ransac(data: dict) -> RansacParams:
    try:
        return RansacParams(
            inlier_threshold=float(data.get("inlier_threshold_m", RansacParams.inlier_threshold)),
            max_iterations=int(data.get("max_iterations", RansacParams.max_iterations)),
            min_inliers=int(data.get("min_inliers", RansacParams.min_inliers)),
            seed=int(data.get("seed", RansacParams.seed)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad ransac parameters: {exc}") from exc


def load_session(path: str | Path) -> Session:
    """Load and validate a calibration session. Measurement paths are resolved
    relative to the session file and must exist."""
    path = Path(path)
    data = read_json(path)
    if "units" not in data:
        raise ParseError(f"{path}: missing mandatory 'units'")
    units = data["units"]
    unit_scale(units)

    entries = data.get("measurements", [])
    if not isinstance(entries, list) or len(entries) < 2:
        raise ParseError(f"{path}: need at least 2 measurement entries")
    measurements: list[tuple[ToolId, Path]] = []
    seen: set[str] = set()
    for rec in entries:
        try:
            tool, rel = str(rec["tool"]), str(rec["path"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}: bad measurement entry {rec!r}: {exc}") from exc
        if not tool:
            raise ParseError(f"{path}: empty tool id")
        if tool in seen:
            raise ParseError(f"{path}: duplicate tool id {tool!r}")
        seen.add(tool)
        mpath = (path.parent / rel).resolve()
        if not mpath.is_file():
            raise ParseError(f"{path}: measurement file not found for {tool}: {mpath}")
        measurements.append((tool, mpath))

    board = None
    if "board" in data and data["board"] is not None:
        if isinstance(data["board"], str):
            board = load_board((path.parent / data["board"]).resolve())
        else:
            try:
                board = BoardModel.from_dict(data["board"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}: bad inline board: {exc}") from exc

    ransac = parse_ransac(data.get("ransac", {}))
    try:
        warn_mm = float(data.get("warn_cross_check_mm", DEFAULT_WARN_CROSS_CHECK_MM))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad warn_cross_check_mm: {exc}") from exc
    return Session(
        units=units,
        measurements=tuple(measurements),
        ransac=ransac,
        board=board,
        warn_cross_check_mm=warn_mm,
    )


def load_session_measurements(session: Session) -> list[MeasurementSet]:
    out = []
    for tool, mpath in session.measurements:
        if mpath.suffix.lower() == ".json":
            m = load_measurement_json(mpath)
            if m.tool != tool:
                raise ParseError(f"{mpath}: file tool {m.tool!r} != session tool {tool!r}")
        else:
            m = load_measurement_csv(mpath, tool=tool, units=session.units)
        out.append(m)
    return out


# --- calibration files -----------------------------------------------------------


def _transform_to_dict(t: RigidTransform) -> dict:
    q, p = t.rotation, t.translation
    return {"quaternion_wxyz": [q.w, q.x, q.y, q.z], "translation_m": [p.x, p.y, p.z]}


def _transform_from_dict(d: dict) -> RigidTransform:
    try:
        w, x, y, z = (float(v) for v in d["quaternion_wxyz"])
        t = Point3.from_array(d["translation_m"])
        return RigidTransform(UnitQuaternion(w, x, y, z), t)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad transform record: {exc}") from exc


def calibration_to_dict(result: CalibrationResult, warnings: list[str] | None = None) -> dict:
    tools = result.tools()
    frames = {}
    for t in tools:
        f = result.frames[t]
        n = f.plane_fit.plane.normal
        frames[t] = {
            "tool_to_common": _transform_to_dict(f.tool_to_common),
            "origin_m": [f.origin.x, f.origin.y, f.origin.z],
            "plane_normal": [n.x, n.y, n.z],
            "plane_offset_m": f.plane_fit.plane.offset,
            "inliers": list(f.plane_fit.inliers),
            "rms_residual_m": f.plane_fit.rms_residual,
        }
    pairwise = {
        f"{a}->{b}": _transform_to_dict(tool_to_tool(result, a, b))
        for a in tools
        for b in tools
        if a != b
    }
    cross = {
        f"{a}->{b}": {"translation_m": c.translation_m, "rotation_rad": c.rotation_rad}
        for (a, b), c in sorted(result.cross_check.items())
    }
    return {
        "units": "m",
        "quaternion_order": QUATERNION_ORDER,
        "tools": tools,
        "frames": frames,
        "pairwise": pairwise,
        "cross_check": cross,
        "warnings": list(warnings or []),
    }


@dataclass(frozen=True)
class LoadedCalibration:
    tools: tuple[ToolId, ...]
    tool_to_common: dict[ToolId, RigidTransform]
    cross_check: dict[tuple[ToolId, ToolId], CrossCheck]
    warnings: tuple[str, ...]

    def transform(self, from_tool: ToolId, to_tool: ToolId) -> RigidTransform:
        for t in (from_tool, to_tool):
            if t not in self.tool_to_common:
                raise UnknownTool(f"tool {t!r} not in calibration (has {sorted(self.tools)})")
        return self.tool_to_common[to_tool].invert().compose(self.tool_to_common[from_tool])


def save_calibration(
    result: CalibrationResult, path: str | Path, warnings: list[str] | None = None
) -> None:
    write_json(calibration_to_dict(result, warnings), path)


def load_calibration(path: str | Path) -> LoadedCalibration:
    path = Path(path)
    data = read_json(path)
    if data.get("quaternion_order", QUATERNION_ORDER) != QUATERNION_ORDER:
        raise ParseError(f"{path}: unsupported quaternion order {data.get('quaternion_order')!r}")
    if data.get("units", "m") != "m":
        raise ParseError(f"{path}: calibration files must be in meters")
    try:
        frames = data["frames"]
        tools = tuple(sorted(frames))
        mapping = {t: _transform_from_dict(frames[t]["tool_to_common"]) for t in tools}
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: bad calibration file: {exc}") from exc
    cross: dict[tuple[ToolId, ToolId], CrossCheck] = {}
    for key, rec in data.get("cross_check", {}).items():
        a, _, b = key.partition("->")
        try:
            cross[(a, b)] = CrossCheck(
                translation_m=float(rec["translation_m"]),
                rotation_rad=float(rec["rotation_rad"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: bad cross_check entry {key!r}: {exc}") from exc
    return LoadedCalibration(
        tools=tools,
        tool_to_common=mapping,
        cross_check=cross,
        warnings=tuple(data.get("warnings", [])),
    )
