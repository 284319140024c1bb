"""Cached segment-cost evaluation for the dynamic-programming detectors.

Models are fitted once per fit-interval and reused for every evaluation
interval, mirroring the solver's separate fitting and cost loops. The
Gaussian family gets a closed-form path built on prefix sums; other model
families go through the generic fit/log-density path. Costs do not depend
on the penalty, so a cache can be shared across a whole penalty grid.

Caches tolerate concurrent reads; computed blocks are inserted once per key
and results are independent of evaluation order.
"""

from __future__ import annotations

import numpy as np

from . import models
from .core import TimeSeries
from .models import LOG_2PI, GaussianSpec, ModelSpec


class _PrefixStats:
    """Per-dimension prefix sums of x and x^2 for O(d) interval moments."""

    def __init__(self, values: np.ndarray):
        t, d = values.shape
        self.sum1 = np.zeros((t + 1, d))
        self.sum2 = np.zeros((t + 1, d))
        np.cumsum(values, axis=0, out=self.sum1[1:])
        np.cumsum(values * values, axis=0, out=self.sum2[1:])

    def moments(self, starts: np.ndarray, ends: np.ndarray):
        """Biased mean and raw variance of x[a:b) for paired index arrays."""
        n = (ends - starts).astype(np.float64)[:, None]
        mean = (self.sum1[ends] - self.sum1[starts]) / n
        raw_var = (self.sum2[ends] - self.sum2[starts]) / n - mean * mean
        return mean, np.maximum(raw_var, 0.0)


class PairwiseCostCache:
    """Serves blocks of pairwise costs c(x[r:s), x[s:t)) for one series/model.

    n_cost_evals counts distinct (r, s, t) cost computations and n_fits counts
    distinct (r, s) model fits; cache hits do not increment either.
    """

    def __init__(self, x: TimeSeries, spec: ModelSpec):
        self.x = x
        self.spec = spec
        self.n_cost_evals = 0
        self.n_fits = 0
        self._blocks: dict = {}
        self._fits: dict = {}
        self._stats = _PrefixStats(x.values) if isinstance(spec, GaussianSpec) else None

    def block(self, s: int, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        """Cost matrix of shape (len(starts), len(ends)) for fixed middle boundary s."""
        key = (int(s), starts.tobytes(), ends.tobytes())
        cached = self._blocks.get(key)
        if cached is not None:
            return cached
        if self._stats is not None:
            block = self._gaussian_block(s, starts, ends)
            self.n_fits += len(starts)
        else:
            block = self._generic_block(s, starts, ends)
        self.n_cost_evals += block.size
        self._blocks[key] = block
        return block

    def _gaussian_block(self, s: int, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        floor = self.spec.variance_floor
        mean, raw_var = self._stats.moments(starts, np.full_like(starts, s))
        var = np.maximum(raw_var, floor)  # (n_r, d)
        n_eval = (ends - s).astype(np.float64)[:, None]
        m1 = (self._stats.sum1[ends] - self._stats.sum1[s]) / n_eval  # (n_t, d)
        m2 = (self._stats.sum2[ends] - self._stats.sum2[s]) / n_eval
        inv_var = 1.0 / var
        const = -0.5 * np.sum(LOG_2PI + np.log(var), axis=1)  # (n_r,)
        # avg squared deviation of the eval interval from each fitted mean
        quad = (
            m2 @ inv_var.T
            - 2.0 * (m1 @ (mean * inv_var).T)
            + np.sum(mean * mean * inv_var, axis=1)[None, :]
        )  # (n_t, n_r)
        return const[:, None] - 0.5 * quad.T

    def _generic_block(self, s: int, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        warmup = self.spec.eval_warmup
        block = np.empty((len(starts), len(ends)))
        for i, r in enumerate(starts):
            csum = self._loglik_cumsum(int(r), s)
            n_terms = ends - s - warmup
            block[i] = csum[ends - s - warmup] / n_terms
        return block

    def _loglik_cumsum(self, r: int, s: int) -> np.ndarray:
        """Cumulative log-density of the (r, s) model over [s+warmup, T)."""
        key = (r, s)
        cached = self._fits.get(key)
        if cached is not None:
            return cached
        model = models.fit(self.spec, self.x, (r, s))
        self.n_fits += 1
        terms = model.log_density_terms(self.x, s, self.x.n_steps)
        csum = np.concatenate([[0.0], np.cumsum(terms)])
        self._fits[key] = csum
        return csum


class SegmentCostCache:
    """Serves single-segment negative log-likelihood costs c(x[s:t))."""

    def __init__(self, x: TimeSeries, spec: ModelSpec):
        self.x = x
        self.spec = spec
        self.n_cost_evals = 0
        self._cols: dict = {}
        self._scalars: dict = {}
        self._stats = _PrefixStats(x.values) if isinstance(spec, GaussianSpec) else None

    def cost_col(self, t: int, starts: np.ndarray) -> np.ndarray:
        """Costs of x[s:t) for fixed end t over an array of starts."""
        key = ("col", int(t), starts.tobytes())
        cached = self._cols.get(key)
        if cached is not None:
            return cached
        if self._stats is not None:
            col = self._gaussian_nll(starts, np.full_like(starts, t))
        else:
            col = np.array([self.cost(int(s), int(t)) for s in starts])
        self.n_cost_evals += col.size
        self._cols[key] = col
        return col

    def cost_row(self, s: int, ends: np.ndarray) -> np.ndarray:
        """Costs of x[s:t) for fixed start s over an array of ends."""
        key = ("row", int(s), ends.tobytes())
        cached = self._cols.get(key)
        if cached is not None:
            return cached
        if self._stats is not None:
            row = self._gaussian_nll(np.full_like(ends, s), ends)
        else:
            row = np.array([self.cost(int(s), int(t)) for t in ends])
        self.n_cost_evals += row.size
        self._cols[key] = row
        return row

    def cost(self, s: int, t: int) -> float:
        key = (s, t)
        cached = self._scalars.get(key)
        if cached is not None:
            return cached
        if self._stats is not None:
            value = float(self._gaussian_nll(np.array([s]), np.array([t]))[0])
        else:
            value = models.segment_nll_cost(self.spec, self.x, (s, t))
        self.n_cost_evals += 1
        self._scalars[key] = value
        return value

    def _gaussian_nll(self, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        floor = self.spec.variance_floor
        mean, raw_var = self._stats.moments(starts, ends)
        var = np.maximum(raw_var, floor)
        n = (ends - starts).astype(np.float64)[:, None]
        # sum of squared deviations from the segment mean is n * raw_var
        return np.sum(0.5 * n * (LOG_2PI + np.log(var)) + 0.5 * n * raw_var / var, axis=1)
