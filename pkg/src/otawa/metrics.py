"""Evaluation metrics comparing a predicted segmentation against a labeled one.

All metrics work on interior change points only; the shared boundaries 0 and
T never enter the set-based distances. Hausdorff and mean distance are
undefined (raised as EmptySet) when a required side has no change points:
silent sentinels would corrupt benchmark averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Segmentation
from .errors import EmptySet, InvalidConfig, MismatchedLength


@dataclass(eq=False)
class MetricsReport:
    """The evaluation metric values for one (truth, prediction) pair.

    hausdorff and mean_distance are None when undefined (one side empty).
    """

    annotation_error: int
    precision: float
    recall: float
    f1: float
    hausdorff: float | None
    mean_distance: float | None
    rand_index: float
    detection_radius: int

    def to_json(self) -> dict:
        return {
            "annotation_error": self.annotation_error,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "hausdorff": self.hausdorff,
            "mean_distance": self.mean_distance,
            "rand_index": self.rand_index,
            "detection_radius": self.detection_radius,
        }

    @staticmethod
    def csv_header() -> list[str]:
        return [
            "annotation_error",
            "precision",
            "recall",
            "f1",
            "hausdorff",
            "mean_distance",
            "rand_index",
            "detection_radius",
        ]

    def csv_row(self) -> list[str]:
        vals = [getattr(self, name) for name in self.csv_header()]
        return ["" if v is None else repr(v) if isinstance(v, float) else str(v) for v in vals]


def _check_same_length(truth: Segmentation, pred: Segmentation) -> None:
    if truth.n_steps != pred.n_steps:
        raise MismatchedLength(
            f"segmentations refer to different lengths: {truth.n_steps} vs {pred.n_steps}"
        )


def annotation_error(truth: Segmentation, pred: Segmentation) -> int:
    """Absolute difference between the numbers of change points."""
    _check_same_length(truth, pred)
    return abs(truth.n_change_points - pred.n_change_points)


def precision_recall_f1(
    truth: Segmentation, pred: Segmentation, radius: int
) -> tuple[float, float, float]:
    """Detection precision, recall and F1 under a matching radius.

    Pairs are matched one-to-one greedily by increasing distance; a true
    change point counts as detected if an unmatched prediction lies within
    `radius` indices. Both sides empty scores (1, 1, 1); exactly one side
    empty scores (0, 0, 0).
    """
    _check_same_length(truth, pred)
    if radius < 1:
        raise InvalidConfig(f"radius must be >= 1, got {radius}")
    m_true, m_pred = truth.n_change_points, pred.n_change_points
    if m_true == 0 and m_pred == 0:
        return (1.0, 1.0, 1.0)
    if m_true == 0 or m_pred == 0:
        return (0.0, 0.0, 0.0)
    pairs = sorted(
        (abs(t - p), t, p)
        for t in truth.change_points
        for p in pred.change_points
        if abs(t - p) <= radius
    )
    matched_t: set[int] = set()
    matched_p: set[int] = set()
    matches = 0
    for _, t, p in pairs:
        if t in matched_t or p in matched_p:
            continue
        matched_t.add(t)
        matched_p.add(p)
        matches += 1
    precision = matches / m_pred
    recall = matches / m_true
    f1 = 0.0 if matches == 0 else 2.0 * precision * recall / (precision + recall)
    return (precision, recall, f1)


def hausdorff(truth: Segmentation, pred: Segmentation) -> float:
    """Largest nearest-neighbor distance between the two change point sets."""
    _check_same_length(truth, pred)
    if truth.n_change_points == 0 or pred.n_change_points == 0:
        raise EmptySet("hausdorff distance is undefined when either side is empty")
    a = np.asarray(truth.change_points)
    b = np.asarray(pred.change_points)
    d_ab = np.abs(a[:, None] - b[None, :])
    return float(max(d_ab.min(axis=1).max(), d_ab.min(axis=0).max()))


def mean_distance(truth: Segmentation, pred: Segmentation) -> float:
    """Mean over true change points of the distance to the closest prediction."""
    _check_same_length(truth, pred)
    if truth.n_change_points == 0 or pred.n_change_points == 0:
        raise EmptySet("mean distance is undefined when either side is empty")
    a = np.asarray(truth.change_points)
    b = np.asarray(pred.change_points)
    return float(np.mean(np.abs(a[:, None] - b[None, :]).min(axis=1)))


def rand_index(truth: Segmentation, pred: Segmentation) -> float:
    """Fraction of index pairs on whose same/different-segment status both agree.

    Computed from segment-overlap counts in O(m_true + m_pred); segment
    intersections are intervals, so each piece between merged boundaries is
    one overlap cell.
    """
    _check_same_length(truth, pred)
    t = truth.n_steps

    def pairs2(n: np.ndarray) -> float:
        return float(np.sum(n * (n - 1) // 2))

    bounds_t = np.array((0,) + truth.change_points + (t,))
    bounds_p = np.array((0,) + pred.change_points + (t,))
    merged = np.unique(np.concatenate([bounds_t, bounds_p]))
    same_t = pairs2(np.diff(bounds_t))
    same_p = pairs2(np.diff(bounds_p))
    same_both = pairs2(np.diff(merged))
    total = t * (t - 1) / 2.0
    agree = total - same_t - same_p + 2.0 * same_both
    return float(agree / total)


def evaluate_segmentations(truth: Segmentation, pred: Segmentation, radius: int) -> MetricsReport:
    """All metrics in one report; undefined set distances become None."""
    precision, recall, f1 = precision_recall_f1(truth, pred, radius)
    try:
        hd = hausdorff(truth, pred)
    except EmptySet:
        hd = None
    try:
        md = mean_distance(truth, pred)
    except EmptySet:
        md = None
    return MetricsReport(
        annotation_error=annotation_error(truth, pred),
        precision=precision,
        recall=recall,
        f1=f1,
        hausdorff=hd,
        mean_distance=md,
        rand_index=rand_index(truth, pred),
        detection_radius=radius,
    )
