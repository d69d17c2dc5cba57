"""File formats: scan grids, scenes, configs, label clouds, PLY, reports.

Every format opens with a magic token so readers can reject the wrong
file early.  Writers format floats with ``repr`` (shortest round-trip),
so identical in-memory data always serializes to identical bytes.

Formats
-------
LSEG1     scan grid: header, elevations in degrees, range rows (nan =
          INVALID), optional LABELS block of ground-truth ids.
LSCENE1   scene: seed plus one primitive per line, key-value style.
LSEGCFG1  pipeline config: INI sections per module, magic in line 1.
LSEGL1    labeled cloud: header with grid dims, then `i j x y z label`
          per valid labeled cell.
"""

from __future__ import annotations

import configparser
import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .baseline import BaselineConfig
from .evaluate import EvalConfig, EvalReport
from .mesh import Mesh, mesh_triangles
from .normals import NormalMap, node_positions
from .pipeline import PipelineConfig
from .scan import ScanGrid, SensorConfig
from .segment import SegmenterConfig
from .simulate import Box, Cone, Cylinder, Plane, Primitive, Scene, Sphere, rotation_rpy

SCAN_MAGIC = "LSEG1"
SCENE_MAGIC = "LSCENE1"
CONFIG_MAGIC = "LSEGCFG1"
LABELS_MAGIC = "LSEGL1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_row(values) -> str:
    return " ".join(_fmt(v) for v in values)


# ---------------------------------------------------------------------------
# scan grid


def write_scan_text(grid: ScanGrid) -> str:
    cfg = grid.config
    lines = [f"{SCAN_MAGIC} {cfg.rings} {cfg.azimuth_steps} {_fmt(cfg.r_min)} {_fmt(cfg.r_max)}"]
    lines.append(_fmt_row(np.degrees(cfg.ring_elevations)))
    for row in grid.ranges:
        lines.append(_fmt_row(row))
    if grid.truth_labels is not None:
        lines.append("LABELS")
        for row in grid.truth_labels:
            lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def save_scan(grid: ScanGrid, path) -> None:
    Path(path).write_text(write_scan_text(grid))


def parse_scan_text(text: str) -> ScanGrid:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty scan file")
    head = lines[0].split()
    if not head or head[0] != SCAN_MAGIC:
        raise ValueError(f"not a {SCAN_MAGIC} scan file")
    rings, steps = int(head[1]), int(head[2])
    r_min, r_max = float(head[3]), float(head[4])
    elev = np.radians([float(v) for v in lines[1].split()])
    if elev.size != rings:
        raise ValueError(f"expected {rings} elevations, got {elev.size}")
    config = SensorConfig(ring_elevations=elev, azimuth_steps=steps, r_min=r_min, r_max=r_max)
    ranges = np.empty((rings, steps))
    for i in range(rings):
        row = np.array(lines[2 + i].split(), dtype=float)
        if row.size != steps:
            raise ValueError(f"range row {i} has {row.size} values, expected {steps}")
        ranges[i] = row
    labels = None
    rest = 2 + rings
    if rest < len(lines) and lines[rest].strip() == "LABELS":
        labels = np.empty((rings, steps), dtype=np.int32)
        for i in range(rings):
            row = np.array(lines[rest + 1 + i].split(), dtype=np.int64)
            if row.size != steps:
                raise ValueError(f"label row {i} has {row.size} values, expected {steps}")
            labels[i] = row
    return ScanGrid(config=config, ranges=ranges, truth_labels=labels)


def load_scan(path) -> ScanGrid:
    return parse_scan_text(Path(path).read_text())


# ---------------------------------------------------------------------------
# scene


def _scene_line(prim: Primitive) -> str:
    if isinstance(prim, Plane):
        parts = ["plane", "point", _fmt_row(prim.point), "normal", _fmt_row(prim.normal)]
        if prim.extent is not None:
            parts += ["extent", _fmt_row(prim.extent)]
        parts += ["id", str(prim.surface_id)]
    elif isinstance(prim, Sphere):
        parts = ["sphere", "center", _fmt_row(prim.center), "radius", _fmt(prim.radius),
                 "id", str(prim.surface_id)]
    elif isinstance(prim, Cylinder):
        parts = ["cylinder", "base", _fmt_row(prim.base), "axis", _fmt_row(prim.axis),
                 "radius", _fmt(prim.radius), "height", _fmt(prim.height),
                 "ids", " ".join(str(i) for i in prim.surface_ids)]
    elif isinstance(prim, Box):
        parts = ["box", "center", _fmt_row(prim.center), "half", _fmt_row(prim.half_extents),
                 "rot", _fmt_row(prim.rotation.reshape(-1)),
                 "ids", " ".join(str(i) for i in prim.surface_ids)]
    elif isinstance(prim, Cone):
        parts = ["cone", "apex", _fmt_row(prim.apex), "axis", _fmt_row(prim.axis),
                 "angle", _fmt(prim.half_angle), "height", _fmt(prim.height),
                 "ids", " ".join(str(i) for i in prim.surface_ids)]
    else:
        raise ValueError(f"unknown primitive {type(prim).__name__}")
    return " ".join(parts)


def write_scene_text(scene: Scene) -> str:
    lines = [SCENE_MAGIC, f"seed {scene.seed}"]
    lines += [_scene_line(p) for p in scene.primitives]
    return "\n".join(lines) + "\n"


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(write_scene_text(scene))


def _take(tokens: list[str], key: str, count: int) -> list[float]:
    pos = tokens.index(key)
    vals = [float(v) for v in tokens[pos + 1 : pos + 1 + count]]
    if len(vals) != count:
        raise ValueError(f"field '{key}' needs {count} numbers")
    return vals


def _take_ints(tokens: list[str], key: str, count: int) -> list[int]:
    pos = tokens.index(key)
    out = []
    for tok in tokens[pos + 1 :]:
        try:
            out.append(int(tok))
        except ValueError:
            break
    if len(out) != count:
        raise ValueError(f"field '{key}' needs {count} integer ids")
    return out


def parse_scene_text(text: str) -> Scene:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != SCENE_MAGIC:
        raise ValueError(f"not a {SCENE_MAGIC} scene file")
    seed = 0
    prims: list[Primitive] = []
    for ln in lines[1:]:
        tokens = ln.split()
        kind = tokens[0]
        if kind == "seed":
            seed = int(tokens[1])
        elif kind == "plane":
            extent = tuple(_take(tokens, "extent", 2)) if "extent" in tokens else None
            prims.append(Plane(point=_take(tokens, "point", 3), normal=_take(tokens, "normal", 3),
                               extent=extent, surface_id=_take_ints(tokens, "id", 1)[0]))
        elif kind == "sphere":
            prims.append(Sphere(center=_take(tokens, "center", 3), radius=_take(tokens, "radius", 1)[0],
                                surface_id=_take_ints(tokens, "id", 1)[0]))
        elif kind == "cylinder":
            prims.append(Cylinder(base=_take(tokens, "base", 3), axis=_take(tokens, "axis", 3),
                                  radius=_take(tokens, "radius", 1)[0],
                                  height=_take(tokens, "height", 1)[0],
                                  surface_ids=tuple(_take_ints(tokens, "ids", 3))))
        elif kind == "box":
            rot = np.array(_take(tokens, "rot", 9)).reshape(3, 3)
            prims.append(Box(center=_take(tokens, "center", 3), half_extents=_take(tokens, "half", 3),
                             rotation=rot, surface_ids=tuple(_take_ints(tokens, "ids", 6))))
        elif kind == "cone":
            prims.append(Cone(apex=_take(tokens, "apex", 3), axis=_take(tokens, "axis", 3),
                              half_angle=_take(tokens, "angle", 1)[0],
                              height=_take(tokens, "height", 1)[0],
                              surface_ids=tuple(_take_ints(tokens, "ids", 2))))
        else:
            raise ValueError(f"unknown scene entry '{kind}'")
    return Scene(primitives=tuple(prims), seed=seed)


def load_scene(path) -> Scene:
    return parse_scene_text(Path(path).read_text())


# ---------------------------------------------------------------------------
# pipeline config


def write_config_text(cfg: PipelineConfig) -> str:
    s = cfg.sensor
    lines = [
        f"# {CONFIG_MAGIC}",
        "[sensor]",
        f"elevations_deg = {_fmt_row(np.degrees(s.ring_elevations))}",
        f"azimuth_steps = {s.azimuth_steps}",
        f"r_min = {_fmt(s.r_min)}",
        f"r_max = {_fmt(s.r_max)}",
        f"noise_sigma = {_fmt(s.noise_sigma)}",
        "",
        "[pipeline]",
        f"interval = {cfg.interval}",
        f"intervals = {' '.join(str(i) for i in cfg.intervals)}",
        "",
        "[segmenter]",
        f"threshold_i = {_fmt(cfg.segmenter.threshold_i)}",
        f"threshold_j = {_fmt(cfg.segmenter.threshold_j)}",
        f"threshold_k = {_fmt(cfg.segmenter.threshold_k)}",
        f"min_segment_size = {cfg.segmenter.min_segment_size}",
        "",
        "[eval]",
        f"dilation_radius = {cfg.eval.dilation_radius}",
        "",
        "[baseline]",
        f"k_neighbors = {cfg.baseline.k_neighbors}",
        f"angle_threshold_deg = {_fmt(np.degrees(cfg.baseline.angle_threshold))}",
        f"curvature_threshold = {_fmt(cfg.baseline.curvature_threshold)}",
        f"min_cluster_size = {cfg.baseline.min_cluster_size}",
    ]
    return "\n".join(lines) + "\n"


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(write_config_text(cfg))


def parse_config_text(text: str) -> PipelineConfig:
    first = text.splitlines()[0] if text else ""
    if CONFIG_MAGIC not in first:
        raise ValueError(f"not a {CONFIG_MAGIC} config file")
    ini = configparser.ConfigParser()
    ini.read_string(text)
    defaults = PipelineConfig()

    sensor = defaults.sensor
    if ini.has_section("sensor"):
        sec = ini["sensor"]
        if "elevations_deg" in sec:
            elev = np.radians([float(v) for v in sec["elevations_deg"].split()])
        else:
            rings = sec.getint("rings", 32)
            elev = np.radians(
                np.linspace(sec.getfloat("elevation_top_deg", 10.67),
                            sec.getfloat("elevation_bottom_deg", -30.67), rings)
            )
        sensor = SensorConfig(
            ring_elevations=elev,
            azimuth_steps=sec.getint("azimuth_steps", 1800),
            r_min=sec.getfloat("r_min", 0.5),
            r_max=sec.getfloat("r_max", 100.0),
            noise_sigma=sec.getfloat("noise_sigma", 0.1),
        )

    interval = defaults.interval
    intervals = defaults.intervals
    if ini.has_section("pipeline"):
        sec = ini["pipeline"]
        interval = sec.getint("interval", interval)
        if "intervals" in sec:
            intervals = tuple(int(v) for v in sec["intervals"].split())

    seg = defaults.segmenter
    if ini.has_section("segmenter"):
        sec = ini["segmenter"]
        seg = SegmenterConfig(
            threshold_i=sec.getfloat("threshold_i", seg.threshold_i),
            threshold_j=sec.getfloat("threshold_j", seg.threshold_j),
            threshold_k=sec.getfloat("threshold_k", seg.threshold_k),
            min_segment_size=sec.getint("min_segment_size", seg.min_segment_size),
        )

    ev = defaults.eval
    if ini.has_section("eval"):
        ev = EvalConfig(dilation_radius=ini["eval"].getint("dilation_radius", ev.dilation_radius))

    base = defaults.baseline
    if ini.has_section("baseline"):
        sec = ini["baseline"]
        base = BaselineConfig(
            k_neighbors=sec.getint("k_neighbors", base.k_neighbors),
            angle_threshold=np.radians(sec.getfloat("angle_threshold_deg",
                                                    np.degrees(base.angle_threshold))),
            curvature_threshold=sec.getfloat("curvature_threshold", base.curvature_threshold),
            min_cluster_size=sec.getint("min_cluster_size", base.min_cluster_size),
        )
    return PipelineConfig(sensor=sensor, interval=interval, intervals=intervals,
                          segmenter=seg, eval=ev, baseline=base)


def load_config(path) -> PipelineConfig:
    return parse_config_text(Path(path).read_text())


# ---------------------------------------------------------------------------
# labeled cloud


def write_labels_text(grid: ScanGrid, labels: np.ndarray) -> str:
    """`i j x y z label` per labeled valid cell, with a dims header."""
    labels = np.asarray(labels)
    lines = [f"{LABELS_MAGIC} {grid.rings} {grid.steps}"]
    pts = grid.points()
    for i, j in np.argwhere(labels > 0):
        x, y, z = pts[i, j]
        lines.append(f"{i} {j} {_fmt(x)} {_fmt(y)} {_fmt(z)} {labels[i, j]}")
    return "\n".join(lines) + "\n"


def save_labels(grid: ScanGrid, labels: np.ndarray, path) -> None:
    Path(path).write_text(write_labels_text(grid, labels))


def parse_labels_text(text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty label file")
    head = lines[0].split()
    if not head or head[0] != LABELS_MAGIC:
        raise ValueError(f"not a {LABELS_MAGIC} label file")
    rings, steps = int(head[1]), int(head[2])
    out = np.zeros((rings, steps), dtype=np.int32)
    for ln in lines[1:]:
        if not ln.strip():
            continue
        parts = ln.split()
        out[int(parts[0]), int(parts[1])] = int(parts[5])
    return out


def load_labels(path) -> np.ndarray:
    """Label grid from a LSEGL1 file, or the LABELS block of a LSEG1 scan."""
    text = Path(path).read_text()
    head = text.split(None, 1)[0] if text.strip() else ""
    if head == SCAN_MAGIC:
        grid = parse_scan_text(text)
        if grid.truth_labels is None:
            raise ValueError(f"scan file {path} carries no LABELS block")
        return np.array(grid.truth_labels)
    return parse_labels_text(text)


# ---------------------------------------------------------------------------
# PLY and debug dumps


def label_color(label: int) -> tuple[int, int, int]:
    """Deterministic palette: golden-ratio hue walk, label 0 = gray."""
    if label == 0:
        return (128, 128, 128)
    h = (label * 0.61803398875) % 1.0
    s, v = 0.75, 0.95
    k = int(h * 6.0)
    f = h * 6.0 - k
    p, q, t = v * (1 - s), v * (1 - s * f), v * (1 - s * (1 - f))
    rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][k % 6]
    return tuple(int(round(255 * c)) for c in rgb)


def write_labeled_ply(grid: ScanGrid, labels: np.ndarray) -> str:
    labels = np.asarray(labels)
    pts = grid.points()
    rows = np.argwhere(grid.valid_mask)
    header = [
        "ply",
        "format ascii 1.0",
        f"comment lidarseg labeled cloud {LABELS_MAGIC}",
        f"element vertex {rows.shape[0]}",
        "property float x",
        "property float y",
        "property float z",
        "property uchar red",
        "property uchar green",
        "property uchar blue",
        "property int label",
        "end_header",
    ]
    body = []
    for i, j in rows:
        x, y, z = pts[i, j]
        lab = int(labels[i, j])
        r, g, b = label_color(lab)
        body.append(f"{_fmt(x)} {_fmt(y)} {_fmt(z)} {r} {g} {b} {lab}")
    return "\n".join(header + body) + "\n"


def write_mesh_ply(grid: ScanGrid, mesh: Mesh) -> str:
    pts = node_positions(grid, mesh)
    tris = mesh_triangles(mesh)
    header = [
        "ply",
        "format ascii 1.0",
        "comment lidarseg mesh",
        f"element vertex {pts.shape[0]}",
        "property float x",
        "property float y",
        "property float z",
        f"element face {tris.shape[0]}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    body = [_fmt_row(p) for p in pts]
    body += [f"3 {a} {b} {c}" for a, b, c in tris]
    return "\n".join(header + body) + "\n"


def write_mesh_adjacency(mesh: Mesh) -> str:
    """Debug dump: `i j : i0 j0 i1 j1 ...` per node, slot order."""
    lines = []
    for nid in range(mesh.n_nodes):
        nbrs = []
        for q in mesh.neighbors[nid]:
            if q >= 0:
                nbrs.append(f"{mesh.node_rings[q]} {mesh.node_steps[q]}")
        lines.append(f"{mesh.node_rings[nid]} {mesh.node_steps[nid]} : " + " ".join(nbrs))
    return "\n".join(lines) + "\n"


def write_normals_text(mesh: Mesh, normals: NormalMap) -> str:
    """Debug dump: `i j nx ny nz` per node with a normal."""
    lines = []
    for nid in np.nonzero(normals.mask)[0]:
        n = normals.values[nid]
        lines.append(f"{mesh.node_rings[nid]} {mesh.node_steps[nid]} {_fmt_row(n)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports


def report_dict(scene: str | None, interval: int | None, report: EvalReport) -> dict:
    return {
        "scene": scene,
        "interval": interval,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "timings_ms": report.timings_ms,
    }


def write_report_json(scene, interval, report: EvalReport) -> str:
    return json.dumps(report_dict(scene, interval, report), indent=2) + "\n"


def save_report(scene, interval, report: EvalReport, path) -> None:
    Path(path).write_text(write_report_json(scene, interval, report))


def write_summary_csv(rows: list[dict]) -> str:
    """CSV aggregation of suite reports (one row per scene x interval)."""
    buf = _io.StringIO()
    fields = ["scene", "interval", "precision", "recall", "f1",
              "mesh_ms", "normals_ms", "segment_ms", "backfill_ms", "total_ms"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        t = row.get("timings_ms") or {}
        writer.writerow({
            "scene": row["scene"],
            "interval": row["interval"],
            "precision": row["precision"],
            "recall": row["recall"],
            "f1": row["f1"],
            "mesh_ms": t.get("mesh", ""),
            "normals_ms": t.get("normals", ""),
            "segment_ms": t.get("segment", ""),
            "backfill_ms": t.get("backfill", ""),
            "total_ms": t.get("total", ""),
        })
    return buf.getvalue()
