"""Penalty selection: minimize an information criterion over a penalty grid.

The criterion scores a segmentation by the in-sample log-likelihood of all
its per-segment maximum-likelihood models plus a log(T)-weighted parameter
count, so it depends only on the segmentation, never on the penalty that
produced it. Grid points are independent and may be solved concurrently; the
recommended setup shares one cost cache across the whole grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import baselines, models
from .core import Segmentation, TimeSeries
from .costs import PairwiseCostCache, SegmentCostCache
from .errors import InvalidConfig
from .models import ModelSpec
from .solver import SolverConfig, solve


@dataclass(frozen=True)
class BetaGrid:
    """A finite, strictly increasing grid of penalty values."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise InvalidConfig("penalty grid must be nonempty")
        if not all(np.isfinite(v) for v in vals):
            raise InvalidConfig("penalty grid values must be finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidConfig("penalty grid values must be strictly increasing")
        object.__setattr__(self, "values", vals)


def default_beta_grid(n: int = 25, low: float = 1e-3, high: float = 10.0) -> BetaGrid:
    """25 logarithmically spaced penalties spanning [1e-3, 10].

    Spans the dense-to-empty segmentation range on min-max-scaled data.
    """
    return BetaGrid(tuple(np.geomspace(low, high, n)))


@dataclass(eq=False)
class SelectionResult:
    best_beta: float
    best_segmentation: Segmentation
    bic_curve: list[tuple[float, float, int]]  # (beta, bic, n_change_points)

    def curve_rows(self) -> list[tuple[float, float, int]]:
        return list(self.bic_curve)


def bic(x: TimeSeries, spec: ModelSpec, seg: Segmentation) -> float:
    """Bayesian information criterion of the piecewise model induced by seg.

    -2 times the summed in-sample log-likelihood of every segment's ML model
    (all m+1 segments contribute) plus log(T) times the total parameter
    count. Autoregressive segments condition within-segment only, skipping
    their first `order` points, exactly as in the pairwise cost.
    """
    if seg.n_steps != x.n_steps:
        raise InvalidConfig("segmentation length does not match series")
    loglik = 0.0
    n_params = 0
    for a, b in seg.segments():
        model = models.fit(spec, x, (a, b))
        loglik += float(np.sum(model.log_density_terms(x, a, b)))
        n_params += model.param_count
    return -2.0 * loglik + float(np.log(x.n_steps)) * n_params


def select_beta(
    x: TimeSeries,
    spec: ModelSpec,
    grid: BetaGrid,
    cfg: SolverConfig,
    solver="otawa",
) -> SelectionResult:
    """Run a detector once per grid penalty and keep the BIC minimizer.

    `solver` is either a callable (x, spec, cfg) -> result with a
    .segmentation attribute (or a bare Segmentation), or one of the strings
    "otawa" / "op" / "bs", for which a cost cache is shared across the grid.
    Ties break toward the larger penalty, i.e. fewer change points.
    """
    solver_fn = _resolve_solver(x, spec, solver)
    curve: list[tuple[float, float, int]] = []
    bic_memo: dict[tuple[int, ...], float] = {}
    best: tuple[float, float, Segmentation] | None = None
    for beta in grid.values:
        result = solver_fn(x, spec, replace(cfg, beta=beta))
        seg = result if isinstance(result, Segmentation) else result.segmentation
        key = seg.change_points
        if key not in bic_memo:
            bic_memo[key] = bic(x, spec, seg)
        value = bic_memo[key]
        curve.append((float(beta), value, seg.n_change_points))
        if best is None or value <= best[0]:
            best = (value, float(beta), seg)
    _, best_beta, best_seg = best
    return SelectionResult(best_beta=best_beta, best_segmentation=best_seg, bic_curve=curve)


def _resolve_solver(x: TimeSeries, spec: ModelSpec, solver):
    if callable(solver):
        return solver
    if solver == "otawa":
        cache = PairwiseCostCache(x, spec)
        return lambda x_, spec_, cfg_: solve(x_, spec_, cfg_, cache=cache)
    if solver in ("op", "bs"):
        seg_cache = SegmentCostCache(x, spec)
        if solver == "op":
            return lambda x_, spec_, cfg_: baselines.optimal_partitioning(
                x_, spec_, cfg_.beta, cfg_.constraints, cache=seg_cache
            )
        return lambda x_, spec_, cfg_: baselines.binary_segmentation(
            x_, spec_, cfg_.beta, cfg_.constraints, cache=seg_cache
        )
    raise InvalidConfig(f"unknown solver {solver!r}")
