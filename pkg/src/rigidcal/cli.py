"""Batch command-line interface.

Subcommands:

- ``calibrate <session.json>``: run the full multi-tool calibration from the
  measurement files a session references and persist transforms, residuals,
  and cross-check discrepancies.
- ``simulate <config.json>``: build a synthetic scene, calibrate it, run the
  grasp and/or trajectory experiments, and emit CSV reports plus a summary.
- ``transform <calib.json> <from> <to> <x> <y> <z> [--units mm|m]``: map one
  point between tool frames.
- ``evaluate <calib.json> <measurements...>``: map fresh measurements into the
  common frame and report cross-tool consistency statistics.

Exit codes: 0 success, 2 parse/config errors, 3 degenerate geometry,
4 unknown tool. Warnings (e.g. a cross-check discrepancy above the session
threshold) are reported but never change the exit code.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .board import BoardModel
from .errors import (
    AmbiguousAxis,
    DegenerateInput,
    EmptyInput,
    InsufficientInliers,
    InvalidDecomposition,
    LengthMismatch,
    OrderMismatch,
    ParseError,
    UnknownTool,
)
from .frame import calibrate
from .geom import Point3
from . import io as rio
from . import metrics
from . import sim

GEOMETRY_ERRORS = (
    DegenerateInput,
    InsufficientInliers,
    AmbiguousAxis,
    OrderMismatch,
    EmptyInput,
    LengthMismatch,
    InvalidDecomposition,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_GEOMETRY = 3
EXIT_UNKNOWN_TOOL = 4


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def cmd_calibrate(args: argparse.Namespace) -> int:
    session = rio.load_session(args.session)
    measurements = rio.load_session_measurements(session)

    warnings: list[str] = []
    if session.board is not None:
        expect = len(session.board.dot_angles)
        for m in measurements:
            if len(m.dot_points) != expect:
                warnings.append(
                    f"tool {m.tool}: {len(m.dot_points)} dots measured, board declares {expect}"
                )

    result = calibrate(measurements, session.ransac)
    for (a, b), check in sorted(result.cross_check.items()):
        mm = check.translation_m * metrics.MM_PER_M
        if mm > session.warn_cross_check_mm:
            warnings.append(
                f"cross-check {a}->{b}: {mm:.3f} mm disagreement exceeds "
                f"{session.warn_cross_check_mm:.3f} mm (check the touch order)"
            )

    out = Path(args.out) if args.out else Path(args.session).with_suffix(".calibration.json")
    rio.save_calibration(result, out, warnings)
    for w in warnings:
        _warn(w)
    print(f"wrote {out}")
    return EXIT_OK


def _parse_noise(data: dict, default_seed: int) -> sim.NoiseModel:
    try:
        return sim.NoiseModel(
            sigma0=float(data.get("sigma0_m", 0.0)),
            k=float(data.get("k", 0.0)),
            seed=int(data.get("seed", default_seed)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad noise model: {exc}") from exc


def _load_sim_config(path: Path) -> dict:
    data = rio.read_json(path)
    if "grasp" not in data and "trajectory" not in data:
        raise ParseError(f"{path}: config enables neither 'grasp' nor 'trajectory'")
    return data


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg_path = Path(args.config)
    cfg = _load_sim_config(cfg_path)
    seed = int(cfg.get("seed", 0))

    board = None
    if "board" in cfg and cfg["board"] is not None:
        if isinstance(cfg["board"], str):
            board = rio.load_board((cfg_path.parent / cfg["board"]).resolve())
        else:
            try:
                board = BoardModel.from_dict(cfg["board"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{cfg_path}: bad inline board: {exc}") from exc

    out_dir = Path(args.out) if args.out else (cfg_path.parent / cfg.get("output_dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    scene = sim.make_scene(seed, n_tools=int(cfg.get("n_tools", 3)), board=board)
    cal_noise = _parse_noise(cfg.get("calibration_noise", {}), seed)
    measurements = sim.simulate_measurements(scene, cal_noise)
    params = rio.parse_ransac(cfg.get("ransac", {}))
    result = calibrate(measurements, params)
    rio.save_calibration(result, out_dir / "calibration.json")

    summary: dict = {
        "seed": seed,
        "tools": result.tools(),
        "residual_rms_mm": {
            t: result.residuals[t] * metrics.MM_PER_M for t in result.tools()
        },
        "cross_check_max_translation_mm": max(
            (c.translation_m * metrics.MM_PER_M for c in result.cross_check.values()),
            default=0.0,
        ),
        "cross_check_max_rotation_deg": max(
            (math.degrees(c.rotation_rad) for c in result.cross_check.values()),
            default=0.0,
        ),
    }

    if "grasp" in cfg:
        g = cfg["grasp"] or {}
        obs_noise = _parse_noise(g.get("observation_noise", {}), seed)
        kin_sigma = float(g.get("kinematic_sigma_m", sim.DEFAULT_KINEMATIC_SIGMA))
        centers = (
            [Point3.from_array(c) for c in g["ring_centers_m"]]
            if "ring_centers_m" in g
            else list(sim.DEFAULT_RING_CENTERS)
        )
        trials = sim.run_grasp_experiment(
            scene,
            result,
            centers,
            obs_noise,
            ring_diameter=float(g.get("ring_diameter_m", sim.DEFAULT_RING_DIAMETER)),
            kinematic_sigma=kin_sigma,
            repeats=int(g.get("repeats", 1)),
        )
        rows = []
        errors_mm = []
        for t in trials:
            for tool, target, err in (
                ("PSM1", t.target_psm1, t.error_psm1),
                ("PSM2", t.target_psm2, t.error_psm2),
            ):
                mm = metrics.MM_PER_M
                rows.append((tool, target.x * mm, target.y * mm, target.z * mm, err * mm))
                errors_mm.append(err * mm)
        metrics.write_grasp_table(out_dir / "grasp_table.csv", rows)
        stats = metrics.error_stats(errors_mm)
        kinematic_mean_mm = kin_sigma * metrics.MM_PER_M * math.sqrt(8.0 / math.pi)
        try:
            calibration_error_mm = metrics.decompose_error(stats.mean, kinematic_mean_mm)
        except InvalidDecomposition:
            # sampling fluctuation can push the total below the intrinsic part
            calibration_error_mm = 0.0
        summary["grasp"] = {
            "n": stats.n,
            "mean_mm": stats.mean,
            "std_mm": stats.std,
            "max_mm": stats.max,
            "kinematic_mean_mm": kinematic_mean_mm,
            "calibration_error_mm": calibration_error_mm,
        }

    if "trajectory" in cfg:
        tr = cfg["trajectory"] or {}
        kin_noise = _parse_noise(
            tr.get("kinematic_noise", {"sigma0_m": sim.DEFAULT_KINEMATIC_SIGMA}), seed
        )
        radii = [float(r) for r in tr.get("radii_m", sim.DEFAULT_RADII)]
        start = Point3.from_array(tr.get("start_m", [0.0, 0.0, 0.10]))
        trials = sim.run_trajectory_experiment(
            scene,
            result,
            radii,
            kin_noise,
            n_waypoints=int(tr.get("n_waypoints", 100)),
            start=start,
        )
        dev_rows = []
        for t in trials:
            dev = metrics.trajectory_deviation(t.executed["PSM1"], t.executed["PSM2"])
            radius_mm = t.radius * metrics.MM_PER_M
            dev_rows.append(
                metrics.DeviationRow(
                    radius_mm=radius_mm, std_mm=dev.std_mm, max_dev_mm=dev.max_dev_mm
                )
            )
            metrics.write_waypoint_series(
                out_dir / f"waypoints_r{radius_mm:g}mm.csv", t.waypoints, dict(t.executed)
            )
        metrics.write_deviation_table(out_dir / "trajectory_table.csv", dev_rows)
        summary["trajectory"] = {
            "rows": [
                {"radius_mm": r.radius_mm, "std_mm": r.std_mm, "maxdev_mm": r.max_dev_mm}
                for r in dev_rows
            ]
        }

    rio.write_json(summary, out_dir / "summary.json")
    print(f"wrote {out_dir}")
    return EXIT_OK


def cmd_transform(args: argparse.Namespace) -> int:
    calib = rio.load_calibration(args.calibration)
    scale = rio.unit_scale(args.units)
    p = Point3(args.x * scale, args.y * scale, args.z * scale)
    mapped = calib.transform(args.from_tool, args.to_tool).apply(p)
    print(f"{mapped.x / scale!r} {mapped.y / scale!r} {mapped.z / scale!r}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    calib = rio.load_calibration(args.calibration)
    tools = [t for t in args.tools.split(",") if t] if args.tools else []
    sets = []
    for i, mpath in enumerate(args.measurements):
        path = Path(mpath)
        if path.suffix.lower() == ".json":
            sets.append(rio.load_measurement_json(path))
        else:
            if i >= len(tools):
                raise ParseError(f"{path}: CSV measurements need --tools entries in file order")
            sets.append(rio.load_measurement_csv(path, tool=tools[i], units=args.units))
    if len(sets) < 2:
        raise ParseError("need at least 2 measurement files to evaluate consistency")
    counts = {m.tool: len(m.dot_points) for m in sets}
    if len(set(counts.values())) != 1:
        raise OrderMismatch(f"dot counts differ across tools: {counts}")

    in_common = {
        m.tool: [calib.transform(m.tool, calib.tools[0]).apply(p) for p in m.dot_points]
        for m in sets
    }
    # statistics are frame-independent, so anchoring at the first tool is fine
    names = sorted(in_common)
    print("pair,mean_mm,std_mm,max_mm,n")
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            stats = metrics.plane_consistency_check(in_common[a], in_common[b])
            print(f"{a}->{b},{stats.mean:.4f},{stats.std:.4f},{stats.max:.4f},{stats.n}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rigidcal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="calibrate from a session file")
    p.add_argument("session", help="session JSON path")
    p.add_argument("--out", help="calibration output path (default: <session>.calibration.json)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="run synthetic experiments from a config file")
    p.add_argument("config", help="experiment config JSON path")
    p.add_argument("--out", help="output directory (default: config's output_dir)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("transform", help="map a point between tool frames")
    p.add_argument("calibration", help="calibration JSON path")
    p.add_argument("from_tool")
    p.add_argument("to_tool")
    p.add_argument("x", type=float)
    p.add_argument("y", type=float)
    p.add_argument("z", type=float)
    p.add_argument("--units", choices=("m", "mm"), default="m")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("evaluate", help="cross-tool consistency of measurements under a calibration")
    p.add_argument("calibration", help="calibration JSON path")
    p.add_argument("measurements", nargs="+", help="measurement files (JSON or CSV)")
    p.add_argument("--units", choices=("m", "mm"), default="mm", help="units for CSV files")
    p.add_argument("--tools", help="comma-separated tool ids for CSV files, in file order")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnknownTool as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_TOOL
    except GEOMETRY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entrypoint() -> None:
    sys.exit(main())
