"""End-to-end pipeline: subsample + mesh -> normals -> segment -> backfill.

Stage timings are collected with ``time.perf_counter`` and exclude any
file I/O; pruning is part of the backfill (label completion) stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baseline import BaselineConfig
from .evaluate import EvalConfig
from .mesh import Mesh, build_mesh
from .normals import NormalMap, estimate_normals
from .scan import ScanGrid, SensorConfig
from .segment import SegmenterConfig, backfill, prune_small, segment


@dataclass(frozen=True)
class PipelineConfig:
    sensor: SensorConfig = field(default_factory=SensorConfig.default)
    interval: int = 5
    intervals: tuple[int, ...] = (5, 10, 15)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)

    def __post_init__(self):
        if self.interval < 1:
            raise ValueError("interval must be >= 1")
        if not self.intervals or any(i < 1 for i in self.intervals):
            raise ValueError("intervals must be positive")
        object.__setattr__(self, "intervals", tuple(int(i) for i in self.intervals))


@dataclass(frozen=True)
class PipelineResult:
    labels: np.ndarray      # dense (rings, steps) label grid after completion
    normals: NormalMap
    mesh: Mesh
    timings_ms: dict[str, float]


def run_pipeline(scan: ScanGrid, cfg: PipelineConfig, interval: int | None = None) -> PipelineResult:
    """Run the full segmentation pipeline on one scan.

    ``interval`` overrides ``cfg.interval`` (used by the suite sweep).
    """
    interval = cfg.interval if interval is None else int(interval)
    t0 = time.perf_counter()
    mesh = build_mesh(scan, interval)
    t1 = time.perf_counter()
    normal_map = estimate_normals(scan, mesh)
    t2 = time.perf_counter()
    node_labels = segment(mesh, normal_map, cfg.segmenter)
    t3 = time.perf_counter()
    labels = backfill(scan, node_labels)
    labels = prune_small(labels, cfg.segmenter.min_segment_size)
    t4 = time.perf_counter()
    timings = {
        "mesh": (t1 - t0) * 1e3,
        "normals": (t2 - t1) * 1e3,
        "segment": (t3 - t2) * 1e3,
        "backfill": (t4 - t3) * 1e3,
        "total": (t4 - t0) * 1e3,
    }
    return PipelineResult(labels=labels, normals=normal_map, mesh=mesh, timings_ms=timings)
