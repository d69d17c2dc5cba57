"""Command-line entry points.

Subcommands: simulate, segment, eval, bench, suite.  All exit 0 on
success and nonzero with a diagnostic on stderr otherwise; a failing
command writes no partial outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as lio
from .baseline import baseline_segment
from .evaluate import bench, edge_prf, time_total, EvalConfig, EvalReport
from .pipeline import run_pipeline
from .simulate import Scene, scan_scene


def _write(path, text: str) -> None:
    Path(path).write_text(text)


def cmd_simulate(args) -> int:
    scene = lio.load_scene(args.scene)
    cfg = lio.load_config(args.sensor)
    if args.seed is not None:
        scene = Scene(primitives=scene.primitives, seed=args.seed)
    grid = scan_scene(scene, cfg.sensor)
    lio.save_scan(grid, args.out)
    return 0


def cmd_segment(args) -> int:
    grid = lio.load_scan(args.scan)
    cfg = lio.load_config(args.config)
    result = run_pipeline(grid, cfg)
    out = Path(args.out)
    if out.suffix == ".ply":
        text = lio.write_labeled_ply(grid, result.labels)
    else:
        text = lio.write_labels_text(grid, result.labels)
    dumps = []
    if args.dump_mesh:
        path = Path(args.dump_mesh)
        if path.suffix == ".ply":
            dumps.append((path, lio.write_mesh_ply(grid, result.mesh)))
        else:
            dumps.append((path, lio.write_mesh_adjacency(result.mesh)))
    if args.dump_normals:
        dumps.append((Path(args.dump_normals), lio.write_normals_text(result.mesh, result.normals)))
    _write(out, text)
    for path, dump in dumps:
        _write(path, dump)
    return 0


def cmd_eval(args) -> int:
    pred = lio.load_labels(args.pred)
    truth = lio.load_labels(args.truth)
    report = edge_prf(pred, truth, EvalConfig(dilation_radius=args.radius))
    text = lio.write_report_json(Path(args.pred).stem, None, report)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    grid = lio.load_scan(args.scan)
    cfg = lio.load_config(args.config)
    stats = bench(lambda: run_pipeline(grid, cfg).timings_ms, args.reps)
    out = {
        "scan": Path(args.scan).stem,
        "interval": cfg.interval,
        "repetitions": args.reps,
        "pipeline_ms": {k: vars(v) | {"samples": list(v.samples)} for k, v in stats.items()},
    }
    if args.baseline:
        points = grid.valid_points()
        base_stats = bench(time_total(lambda: baseline_segment(points, cfg.baseline)), args.reps)
        out["baseline_ms"] = {k: vars(v) | {"samples": list(v.samples)} for k, v in base_stats.items()}
        out["speed_ratio"] = base_stats["total"].median / stats["total"].median
    text = json.dumps(out, indent=2) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_suite(args) -> int:
    scene_dir = Path(args.scenes)
    cfg = lio.load_config(args.config)
    scene_files = sorted(scene_dir.glob("*.scene"))
    if not scene_files:
        raise ValueError(f"no .scene files in {scene_dir}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for scene_file in scene_files:
        scene = lio.load_scene(scene_file)
        grid = scan_scene(scene, cfg.sensor)
        truth = grid.truth_labels
        for interval in cfg.intervals:
            result = run_pipeline(grid, cfg, interval=interval)
            report = edge_prf(result.labels, truth, cfg.eval)
            report = EvalReport(precision=report.precision, recall=report.recall,
                                f1=report.f1, timings_ms=result.timings_ms)
            name = scene_file.stem
            lio.save_report(name, interval, report, out_dir / f"{name}_i{interval}.json")
            rows.append(lio.report_dict(name, interval, report))
    _write(out_dir / "summary.csv", lio.write_summary_csv(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lidarseg",
                                     description="Fast geometric surface segmentation for spinning-Lidar scans")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="ray-cast a scene file into a scan grid")
    p.add_argument("--scene", required=True)
    p.add_argument("--sensor", required=True, help="config file; its [sensor] section is used")
    p.add_argument("--seed", type=int, default=None, help="override the scene's noise seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("segment", help="run the segmentation pipeline on a scan")
    p.add_argument("--scan", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help=".ply for a colored cloud, else labels text")
    p.add_argument("--dump-mesh", default=None)
    p.add_argument("--dump-normals", default=None)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="edge precision/recall/F1 of predicted vs truth labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True, help="label file or scan file with LABELS block")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="wall-clock pipeline timings (optionally vs baseline)")
    p.add_argument("--scan", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--reps", type=int, default=9)
    p.add_argument("--baseline", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("suite", help="run scenes x intervals, emit JSON reports + CSV summary")
    p.add_argument("--scenes", required=True, help="directory of .scene files")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"lidarseg {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
