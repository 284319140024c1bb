"""Classic sum-of-costs detectors: Optimal Partitioning, Binary Segmentation,
and Window Sliding with greedy peak detection.

All three minimize (or approximate) the penalized sum of single-segment
negative log-likelihood costs, sharing the (S, R) constraint semantics of the
pairwise solver. Score computation over window positions is embarrassingly
parallel; the detectors themselves are sequential and pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models
from .core import Constraints, Segmentation, TimeSeries
from .costs import SegmentCostCache
from .errors import Infeasible, InvalidConfig, SeriesTooShort
from .models import ModelSpec
from .solver import SolveResult, _check_fit_length, admissible_candidates


def classic_objective_value(
    x: TimeSeries, spec: ModelSpec, beta: float, seg: Segmentation
) -> float:
    """Sum of per-segment NLL costs plus beta per change point.

    Accumulated segment-by-segment in the same order as the partitioning DP.
    """
    if seg.n_steps != x.n_steps:
        raise InvalidConfig("segmentation length does not match series")
    total = -beta
    for a, b in seg.segments():
        total += models.segment_nll_cost(spec, x, (a, b))
        total += beta
    return total


def optimal_partitioning(
    x: TimeSeries,
    spec: ModelSpec,
    beta: float,
    constraints: Constraints = Constraints(),
    cache: SegmentCostCache | None = None,
) -> SolveResult:
    """Exact minimizer of the penalized sum of segment costs.

    One-dimensional DP over segment ends: F(t) = min_s F(s) + c(x[s:t)) + beta
    with F(0) = -beta, so a segmentation with m change points pays exactly
    beta * m. Ties break toward fewer change points, then lexicographically.
    """
    _check_fit_length(spec, constraints)
    if cache is None:
        cache = SegmentCostCache(x, spec)
    evals_before = cache.n_cost_evals
    t_total = x.n_steps
    s_min = constraints.min_segment_len
    cands = admissible_candidates(t_total, constraints)
    bounds = np.concatenate([[0], cands, [t_total]])
    n = len(bounds)
    f = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    f[0] = -beta

    def chain(q: int) -> tuple[int, ...]:
        out = []
        while q > 0:
            out.append(int(bounds[q]))
            q = int(pred[q])
        return tuple(reversed(out[1:]))  # drop the final boundary itself

    def tie_key(p: int) -> tuple:
        cps_via_p = chain(p) + ((int(bounds[p]),) if p else ())
        return (len(cps_via_p), cps_via_p)

    for q in range(1, n):
        t = int(bounds[q])
        n_s = int(np.searchsorted(bounds[:-1], t - s_min, side="right"))
        if n_s == 0:
            continue
        vals = f[:n_s] + cache.cost_col(t, bounds[:n_s]) + beta
        best = int(np.argmin(vals))
        minv = vals[best]
        if not np.isfinite(minv):
            continue
        tied = np.flatnonzero(vals == minv)
        if len(tied) > 1:
            best = min((int(p) for p in tied), key=tie_key)
        f[q] = vals[best]
        pred[q] = best
        counts[q] = counts[best] + (1 if best > 0 else 0)

    if not np.isfinite(f[n - 1]):
        raise Infeasible("constraints exclude every segmentation of the series")
    cps = chain(n - 1)
    return SolveResult(
        segmentation=Segmentation(t_total, cps),
        objective=float(f[n - 1]),
        beta=beta,
        n_cost_evals=cache.n_cost_evals - evals_before,
    )


def binary_segmentation(
    x: TimeSeries,
    spec: ModelSpec,
    beta: float,
    constraints: Constraints = Constraints(),
    cache: SegmentCostCache | None = None,
) -> Segmentation:
    """Greedy top-down splitter for the penalized sum-of-costs objective.

    Each round applies the admissible split with the largest cost reduction;
    splitting stops once the best reduction is <= beta or no admissible split
    remains. Returns the empty segmentation when nothing is admissible.
    """
    _check_fit_length(spec, constraints)
    if cache is None:
        cache = SegmentCostCache(x, spec)
    t_total = x.n_steps
    s_min = constraints.min_segment_len
    cands = admissible_candidates(t_total, constraints)
    cps: list[int] = []
    while True:
        bounds = [0] + cps + [t_total]
        best_gain, best_split = -np.inf, None
        for a, b in zip(bounds[:-1], bounds[1:]):
            lo = int(np.searchsorted(cands, a + s_min, side="left"))
            hi = int(np.searchsorted(cands, b - s_min, side="right"))
            if lo >= hi:
                continue
            splits = cands[lo:hi]
            gains = cache.cost(a, b) - cache.cost_row(a, splits) - cache.cost_col(b, splits)
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain, best_split = float(gains[k]), int(splits[k])
        if best_split is None or best_gain <= beta:
            break
        cps = sorted(cps + [best_split])
    return Segmentation(t_total, cps)


@dataclass(eq=False)
class WsScoreSeries:
    """Split-gain scores d(t) for every window center t in [L, T - L]."""

    scores: np.ndarray
    window_len: int
    n_steps: int

    @property
    def t_values(self) -> np.ndarray:
        return np.arange(self.window_len, self.n_steps - self.window_len + 1)

    def rows(self) -> list[tuple[int, float]]:
        return [(int(t), float(d)) for t, d in zip(self.t_values, self.scores)]


def window_sliding_scores(x: TimeSeries, spec: ModelSpec, window_len: int) -> WsScoreSeries:
    """Discrepancy score of two adjacent length-L windows at every center t.

    d(t) = c(x[t-L:t+L)) - c(x[t-L:t)) - c(x[t:t+L)) with the segment NLL
    cost; nonnegative for Gaussian costs since the split fits cannot be worse
    than the joint fit.
    """
    t_total = x.n_steps
    if window_len < spec.min_fit_length:
        raise InvalidConfig(
            f"window_len {window_len} is shorter than the model's minimum fit length "
            f"{spec.min_fit_length}"
        )
    if t_total < 2 * window_len:
        raise SeriesTooShort(f"need T >= 2L = {2 * window_len}, got {t_total}")
    ts = range(window_len, t_total - window_len + 1)
    scores = np.empty(len(ts))
    for k, t in enumerate(ts):
        joint = models.segment_nll_cost(spec, x, (t - window_len, t + window_len))
        left = models.segment_nll_cost(spec, x, (t - window_len, t))
        right = models.segment_nll_cost(spec, x, (t, t + window_len))
        scores[k] = joint - left - right
    return WsScoreSeries(scores=scores, window_len=window_len, n_steps=t_total)


def peak_detect(
    score_series: WsScoreSeries,
    min_spacing: int,
    threshold: float | None = None,
    k: int | None = None,
    resolution: int = 1,
) -> Segmentation:
    """Greedy non-maximum suppression over window scores.

    Repeatedly emits the highest remaining score's index and suppresses all
    indices strictly closer than min_spacing, until k peaks are emitted or the
    next peak falls below threshold. Exactly one of threshold / k must be
    given. Candidates can be restricted to multiples of `resolution`.
    """
    if (threshold is None) == (k is None):
        raise InvalidConfig("provide exactly one of threshold or k")
    if min_spacing < 1:
        raise InvalidConfig(f"min_spacing must be >= 1, got {min_spacing}")
    order = []
    for t, d in zip(score_series.t_values, score_series.scores):
        if t % resolution == 0 and np.isfinite(d):
            order.append((-float(d), int(t)))
    order.sort()
    peaks: list[int] = []
    for neg_d, t in order:
        if k is not None and len(peaks) >= k:
            break
        if threshold is not None and -neg_d < threshold:
            break
        if any(abs(t - p) < min_spacing for p in peaks):
            continue
        peaks.append(t)
    return Segmentation(score_series.n_steps, sorted(peaks))
