"""Edge-based precision/recall/F1 against ground truth, plus benchmarking.

Segment quality is scored on boundary cells: a labeled cell is an edge
cell when one of its 4 grid neighbors (azimuth wraps, rings do not) holds
a different nonzero label.  Predicted and truth edge sets are compared
after dilating each by a Chebyshev radius in grid cells, so slightly
displaced boundaries still count as matches.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from statistics import mean, median
from typing import Callable, Mapping

import numpy as np


@dataclass(frozen=True)
class EvalConfig:
    """Chebyshev dilation radius in grid cells (2 cells = 0.4 deg azimuth
    at full resolution)."""

    dilation_radius: int = 2

    def __post_init__(self):
        if self.dilation_radius < 0:
            raise ValueError("dilation_radius must be >= 0")


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    timings_ms: dict | None = None


def extract_edges(labels: np.ndarray) -> np.ndarray:
    """Boolean mask of edge cells of a label grid (0 = unlabeled).

    A cell is an edge cell iff it is labeled and any of its 4 neighbors
    (up/down clamped, left/right wrapping) is labeled differently.
    Unlabeled cells never produce edges.
    """
    lab = np.asarray(labels)
    pos = lab > 0
    edge = np.zeros(lab.shape, dtype=bool)
    for shift in (1, -1):
        nb = np.roll(lab, shift, axis=1)
        edge |= pos & (nb > 0) & (nb != lab)
    edge[1:] |= pos[1:] & (lab[:-1] > 0) & (lab[:-1] != lab[1:])
    edge[:-1] |= pos[:-1] & (lab[1:] > 0) & (lab[1:] != lab[:-1])
    return edge


def dilate_chebyshev(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation with a (2r+1)^2 square; azimuth wraps, rings clamp."""
    if radius == 0:
        return mask.copy()
    vert = mask.copy()
    for dr in range(1, radius + 1):
        vert[dr:] |= mask[:-dr]
        vert[:-dr] |= mask[dr:]
    out = vert.copy()
    for dc in range(1, radius + 1):
        out |= np.roll(vert, dc, axis=1)
        out |= np.roll(vert, -dc, axis=1)
    return out


def edge_prf(pred_labels: np.ndarray, truth_labels: np.ndarray, cfg: EvalConfig) -> EvalReport:
    """Edge precision/recall/F1 with dilated matching.

    precision: fraction of predicted edge cells within the dilation radius
    of a truth edge cell; recall: the converse; F1: their harmonic mean
    (0 when either is 0).  Both edge sets empty scores 1/1/1.
    """
    pred_labels = np.asarray(pred_labels)
    truth_labels = np.asarray(truth_labels)
    if pred_labels.shape != truth_labels.shape:
        raise ValueError(f"label grids differ in shape: {pred_labels.shape} vs {truth_labels.shape}")
    pe = extract_edges(pred_labels)
    te = extract_edges(truth_labels)
    n_pred = int(pe.sum())
    n_truth = int(te.sum())
    if n_pred == 0 and n_truth == 0:
        return EvalReport(precision=1.0, recall=1.0, f1=1.0)
    r = cfg.dilation_radius
    precision = float((pe & dilate_chebyshev(te, r)).sum() / n_pred) if n_pred else 0.0
    recall = float((te & dilate_chebyshev(pe, r)).sum() / n_truth) if n_truth else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision > 0.0 and recall > 0.0 else 0.0
    return EvalReport(precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class StageStats:
    """Wall-clock statistics in milliseconds over the benchmark repetitions."""

    min: float
    median: float
    mean: float
    max: float
    samples: tuple[float, ...]

    @classmethod
    def of(cls, samples) -> "StageStats":
        s = tuple(float(x) for x in samples)
        return cls(min=min(s), median=median(s), mean=mean(s), max=max(s), samples=s)


def bench(pipeline: Callable[[], Mapping[str, float]], repetitions: int) -> dict[str, StageStats]:
    """Run ``pipeline`` (returning per-stage millisecond timings) with one
    discarded warm-up plus ``repetitions`` timed runs; aggregate per stage."""
    if repetitions < 3:
        raise ValueError("repetitions must be >= 3")
    pipeline()  # warm-up, discarded
    runs = [dict(pipeline()) for _ in range(repetitions)]
    stages = runs[0].keys()
    return {stage: StageStats.of([run[stage] for run in runs]) for stage in stages}


def time_total(fn: Callable[[], object]) -> Callable[[], dict[str, float]]:
    """Wrap a plain callable so bench() sees a single 'total' stage."""

    def run() -> dict[str, float]:
        t0 = time.perf_counter()
        fn()
        return {"total": (time.perf_counter() - t0) * 1e3}

    return run
