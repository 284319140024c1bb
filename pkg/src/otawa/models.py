"""Segment models: i.i.d. Gaussian and L1-regularized vector autoregression.

Each family provides maximum-likelihood fitting on a half-open interval,
per-point log densities, the pairwise cost (average log-likelihood of the
model fitted on the prior segment, evaluated on the subsequent segment) and
the plain negative log-likelihood cost used by the sum-of-costs detectors.

All operations are pure functions of immutable inputs and may be evaluated
concurrently on a shared series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TimeSeries
from .errors import IntervalTooShort, InvalidConfig

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GaussianSpec:
    """I.i.d. Gaussian with diagonal covariance, fitted per segment.

    variance_floor clamps fitted variances from below so constant segments
    keep a finite log-density.
    """

    variance_floor: float = 1e-8

    def __post_init__(self):
        if not self.variance_floor > 0:
            raise InvalidConfig(f"variance_floor must be > 0, got {self.variance_floor}")

    @property
    def min_fit_length(self) -> int:
        return 2

    @property
    def eval_warmup(self) -> int:
        return 0


@dataclass(frozen=True)
class VarSpec:
    """Vector autoregression of a given order with an L1 coefficient penalty.

    The intercept is unpenalized. param_count_mode selects how many parameters
    a fitted model reports for information criteria: "full" counts coefficient
    matrices, intercept and noise variances (d*d*order + 2d), "order_only"
    counts just the order (the minimal convention for univariate models).
    """

    order: int
    l1_alpha: float = 0.0
    max_iter: int = 500
    tol: float = 1e-8
    variance_floor: float = 1e-8
    param_count_mode: str = "full"

    def __post_init__(self):
        if self.order < 1:
            raise InvalidConfig(f"order must be >= 1, got {self.order}")
        if self.l1_alpha < 0:
            raise InvalidConfig(f"l1_alpha must be >= 0, got {self.l1_alpha}")
        if self.max_iter < 1:
            raise InvalidConfig(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise InvalidConfig(f"tol must be > 0, got {self.tol}")
        if not self.variance_floor > 0:
            raise InvalidConfig(f"variance_floor must be > 0, got {self.variance_floor}")
        if self.param_count_mode not in ("full", "order_only"):
            raise InvalidConfig(f"unknown param_count_mode {self.param_count_mode!r}")

    @property
    def min_fit_length(self) -> int:
        # at least two regression rows
        return self.order + 2

    @property
    def eval_warmup(self) -> int:
        return self.order


ModelSpec = GaussianSpec | VarSpec


def min_fit_length(spec: ModelSpec) -> int:
    return spec.min_fit_length


def spec_from_json(obj: dict) -> ModelSpec:
    """Build a model spec from a JSON/CLI config dict."""
    kind = obj.get("model")
    if kind == "gaussian":
        return GaussianSpec(variance_floor=float(obj.get("variance_floor", 1e-8)))
    if kind == "var":
        return VarSpec(
            order=int(obj["order"]),
            l1_alpha=float(obj.get("l1_alpha", 0.0)),
            max_iter=int(obj.get("max_iter", 500)),
            tol=float(obj.get("tol", 1e-8)),
            variance_floor=float(obj.get("variance_floor", 1e-8)),
            param_count_mode=str(obj.get("param_count_mode", "full")),
        )
    raise InvalidConfig(f"unknown model kind {kind!r}")


def spec_to_json(spec: ModelSpec) -> dict:
    if isinstance(spec, GaussianSpec):
        return {"model": "gaussian", "variance_floor": spec.variance_floor}
    return {
        "model": "var",
        "order": spec.order,
        "l1_alpha": spec.l1_alpha,
        "max_iter": spec.max_iter,
        "tol": spec.tol,
        "variance_floor": spec.variance_floor,
        "param_count_mode": spec.param_count_mode,
    }


@dataclass(eq=False)
class GaussianModel:
    spec: GaussianSpec
    mean: np.ndarray  # (d,)
    variance: np.ndarray  # (d,), floored

    @property
    def param_count(self) -> int:
        # mean and variance per dimension
        return 2 * self.mean.shape[0]

    def log_density_terms(self, x: TimeSeries, s: int, t: int) -> np.ndarray:
        """Per-point log densities of x[s:t) under N(mean, diag(variance))."""
        arr = x.values[s:t]
        const = -0.5 * float(np.sum(LOG_2PI + np.log(self.variance)))
        dev = arr - self.mean
        return const - 0.5 * np.sum(dev * dev / self.variance, axis=1)


@dataclass(eq=False)
class VarModel:
    spec: VarSpec
    coeffs: np.ndarray  # (order, d, d); coeffs[k] maps x_{t-k-1} to x_t
    intercept: np.ndarray  # (d,)
    variance: np.ndarray  # (d,), floored residual variance
    objective_path: tuple  # penalized objective after each coordinate-descent sweep

    @property
    def param_count(self) -> int:
        d = self.intercept.shape[0]
        if self.spec.param_count_mode == "order_only":
            return self.spec.order
        return self.spec.order * d * d + 2 * d

    def predict(self, x: TimeSeries, s: int, t: int) -> np.ndarray:
        """One-step-ahead predictions for indices [s+order, t) from in-interval history."""
        p = self.spec.order
        _, design = lagged_design(x.values, s, t, p)
        # design rows are [x_{j-1}, ..., x_{j-p}] flattened, matching the fit layout
        flat = np.concatenate(list(self.coeffs), axis=1)  # (d, p*d)
        return self.intercept + design @ flat.T

    def log_density_terms(self, x: TimeSeries, s: int, t: int) -> np.ndarray:
        """Per-point conditional log densities for indices [s+order, t)."""
        p = self.spec.order
        targets = x.values[s + p : t]
        preds = self.predict(x, s, t)
        const = -0.5 * float(np.sum(LOG_2PI + np.log(self.variance)))
        dev = targets - preds
        return const - 0.5 * np.sum(dev * dev / self.variance, axis=1)


FittedModel = GaussianModel | VarModel


def lagged_design(values: np.ndarray, a: int, b: int, order: int):
    """Targets and lagged regressors for rows j in [a+order, b).

    Row j of the design is the concatenation [x_{j-1}, ..., x_{j-order}].
    """
    targets = values[a + order : b]
    cols = [values[a + order - k : b - k] for k in range(1, order + 1)]
    design = np.concatenate(cols, axis=1) if cols else np.empty((len(targets), 0))
    return targets, design


def fit(spec: ModelSpec, x: TimeSeries, interval: tuple[int, int]) -> FittedModel:
    """Maximum-likelihood fit of the model on x[a:b).

    Gaussian: per-dimension sample mean and biased variance, floored.
    VAR: coefficients minimize the mean squared one-step-ahead error plus
    l1_alpha times the L1 norm of the coefficient entries (intercept
    unpenalized), via cyclic coordinate descent; noise variance is the
    per-dimension biased residual variance, floored.
    """
    a, b = interval
    _check_interval(x, a, b)
    if b - a < spec.min_fit_length:
        raise IntervalTooShort(
            f"interval [{a}, {b}) has {b - a} points; model needs >= {spec.min_fit_length}"
        )
    if isinstance(spec, GaussianSpec):
        arr = x.values[a:b]
        mean = arr.mean(axis=0)
        variance = np.maximum(arr.var(axis=0), spec.variance_floor)
        return GaussianModel(spec=spec, mean=mean, variance=variance)
    return _fit_var(spec, x, a, b)


def _fit_var(spec: VarSpec, x: TimeSeries, a: int, b: int) -> VarModel:
    p, d = spec.order, x.n_dims
    targets, design = lagged_design(x.values, a, b, p)
    weights, intercept, path = _lasso_cd(
        design, targets, spec.l1_alpha, spec.max_iter, spec.tol
    )
    resid = targets - intercept - design @ weights.T
    variance = np.maximum(np.mean(resid * resid, axis=0), spec.variance_floor)
    coeffs = np.stack([weights[:, k * d : (k + 1) * d] for k in range(p)])
    return VarModel(
        spec=spec,
        coeffs=coeffs,
        intercept=intercept,
        variance=variance,
        objective_path=tuple(path),
    )


def _lasso_cd(design, targets, alpha, max_iter, tol):
    """Cyclic coordinate descent for a multi-output lasso with free intercept.

    Minimizes (1/n) * sum_t ||y_t - c - W z_t||^2 + alpha * sum|W| jointly in
    W and c. Regressors are centered and scaled to unit variance internally;
    soft thresholds are rescaled so the minimizer is for the raw objective,
    and the intercept is recovered in closed form from the column means.
    Returns (W, c, objective_path) with one objective value per sweep.
    """
    n, n_feat = design.shape
    d_out = targets.shape[1]
    z_mean = design.mean(axis=0)
    y_mean = targets.mean(axis=0)
    zc = design - z_mean
    yc = targets - y_mean
    scale = np.sqrt(np.mean(zc * zc, axis=0))
    active = np.flatnonzero(scale > 0.0)
    zs = np.zeros_like(zc)
    if active.size:
        zs[:, active] = zc[:, active] / scale[active]
    col_ssq = np.einsum("ij,ij->j", zs, zs)  # exact per-column sum of squares
    thresholds = np.zeros(n_feat)
    if active.size:
        thresholds[active] = n * alpha / (2.0 * scale[active])

    w = np.zeros((d_out, n_feat))  # standardized-scale coefficients
    resid = yc.copy()
    path = []
    for _ in range(max_iter):
        max_delta = 0.0
        for k in active:
            zk = zs[:, k]
            rho = resid.T @ zk + col_ssq[k] * w[:, k]
            new = np.sign(rho) * np.maximum(np.abs(rho) - thresholds[k], 0.0) / col_ssq[k]
            delta = new - w[:, k]
            if np.any(delta):
                resid -= np.outer(zk, delta)
                w[:, k] = new
            max_delta = max(max_delta, float(np.max(np.abs(delta))) / scale[k])
        w_raw = np.zeros_like(w)
        if active.size:
            w_raw[:, active] = w[:, active] / scale[active]
        obj = float(np.sum(resid * resid)) / n + alpha * float(np.sum(np.abs(w_raw)))
        path.append(obj)
        if max_delta < tol:
            break
    w_raw = np.zeros_like(w)
    if active.size:
        w_raw[:, active] = w[:, active] / scale[active]
    intercept = y_mean - w_raw @ z_mean
    return w_raw, intercept, path


def avg_loglik(model: FittedModel, x: TimeSeries, interval: tuple[int, int]) -> float:
    """Average per-point log-likelihood of a fitted model on x[s:t).

    Autoregressive models condition only on history inside the interval, so
    the first `order` points are skipped and the average runs over the
    remaining t - s - order terms.
    """
    s, t = interval
    _check_interval(x, s, t)
    warmup = model.spec.eval_warmup
    if t - s - warmup < 1:
        raise IntervalTooShort(
            f"interval [{s}, {t}) leaves no evaluation points after warmup {warmup}"
        )
    return float(np.mean(model.log_density_terms(x, s, t)))


def nce_cost(spec: ModelSpec, x: TimeSeries, r: int, s: int, t: int) -> float:
    """Pairwise cost of adjacent segments x[r:s) and x[s:t).

    Fits the model on the prior segment and returns its average log-likelihood
    on the subsequent one. Minimizing this value drives adjacent segment
    distributions as far apart as possible.
    """
    if not r < s < t:
        raise InvalidConfig(f"need r < s < t, got ({r}, {s}, {t})")
    model = fit(spec, x, (r, s))
    return avg_loglik(model, x, (s, t))


def segment_nll_cost(spec: ModelSpec, x: TimeSeries, interval: tuple[int, int]) -> float:
    """Negative log-likelihood of x[a:b) under its own maximum-likelihood fit.

    An unnormalized sum; autoregressive models skip the first `order` terms.
    """
    a, b = interval
    model = fit(spec, x, (a, b))
    return -float(np.sum(model.log_density_terms(x, a, b)))


def _check_interval(x: TimeSeries, a: int, b: int) -> None:
    if not (0 <= a < b <= x.n_steps):
        raise InvalidConfig(f"interval [{a}, {b}) out of range for T={x.n_steps}")
