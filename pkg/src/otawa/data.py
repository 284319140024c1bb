"""Data ingestion, preprocessing, and seeded synthetic generators.

CSV files are comma-delimited with '.' decimals and an optional header.
Preprocessing covers per-dimension min-max scaling, stride subsampling,
calendar-day averaging, and a Hann-windowed magnitude spectrogram restricted
to a frequency band. Generators produce piecewise i.i.d. Gaussian or
piecewise-autoregressive series, bit-identical for a given seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import Segmentation, TimeSeries
from .errors import InvalidConfig, NonFinite, ParseError, SeriesTooShort, UnstableCoefficients


def read_csv(path, has_header: bool = False, timestamp_col: int | None = None) -> TimeSeries:
    """Load a numeric series; rows are time steps, columns are dimensions.

    A parse failure names the offending 1-based row and column. An optional
    timestamp column (ISO dates or epoch seconds) is split off into the
    series' timestamps.
    """
    rows: list[list[float]] = []
    stamps: list = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for i, row in enumerate(reader, start=1):
            if has_header and i == 1:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"row {i}: expected {width} columns, got {len(row)}")
            values = []
            for j, cell in enumerate(row, start=1):
                if timestamp_col is not None and j - 1 == timestamp_col:
                    stamps.append(_parse_timestamp(cell, i, j))
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(f"row {i}, column {j}: could not parse {cell!r}") from None
                if not math.isfinite(value):
                    raise NonFinite(f"row {i}, column {j}: non-finite value {cell!r}")
                values.append(value)
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    timestamps = np.array(stamps, dtype="datetime64[s]") if timestamp_col is not None else None
    return TimeSeries(np.array(rows), timestamps=timestamps)


def _parse_timestamp(cell: str, i: int, j: int):
    try:
        return np.datetime64(cell)
    except ValueError:
        pass
    try:
        return np.datetime64(int(float(cell)), "s")
    except ValueError:
        raise ParseError(f"row {i}, column {j}: could not parse timestamp {cell!r}") from None


def write_csv(x: TimeSeries, path, header: list[str] | None = None) -> None:
    """Write series values with full round-trip precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in x.values:
            writer.writerow([repr(float(v)) for v in row])


def minmax_scale(x: TimeSeries) -> TimeSeries:
    """Scale each dimension to [0, 1]; constant dimensions map to zeros."""
    lo = x.values.min(axis=0)
    hi = x.values.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (x.values - lo) / safe, 0.0)
    return TimeSeries(scaled, timestamps=x.timestamps)


def subsample(x: TimeSeries, rate: int) -> TimeSeries:
    """Keep indices 0, rate, 2*rate, ...; the new length is ceil(T / rate)."""
    if rate < 1:
        raise InvalidConfig(f"rate must be >= 1, got {rate}")
    ts = x.timestamps[::rate] if x.timestamps is not None else None
    return TimeSeries(x.values[::rate], timestamps=ts)


def daily_average(x: TimeSeries) -> TimeSeries:
    """One observation per calendar day: the mean of that day's rows.

    Requires timestamps; days are ordered by date.
    """
    if x.timestamps is None:
        raise InvalidConfig("daily averaging needs a series with timestamps")
    days = x.timestamps.astype("datetime64[D]")
    uniq, inverse = np.unique(days, return_inverse=True)
    out = np.zeros((len(uniq), x.n_dims))
    counts = np.bincount(inverse, minlength=len(uniq)).astype(np.float64)
    for k in range(x.n_dims):
        out[:, k] = np.bincount(inverse, weights=x.values[:, k], minlength=len(uniq))
    out /= counts[:, None]
    return TimeSeries(out, timestamps=uniq.astype("datetime64[s]"))


@dataclass(frozen=True)
class StftConfig:
    """Short-time Fourier transform configuration.

    Frames of window_len samples are Hann-windowed and spaced by
    hop = round(window_len * (1 - overlap_fraction)); only magnitude bins
    whose frequency lies in [band_low_hz, band_high_hz] (inclusive) are kept.
    """

    window_len: int
    overlap_fraction: float
    sample_rate_hz: float
    band_low_hz: float
    band_high_hz: float

    def __post_init__(self):
        if self.window_len < 2:
            raise InvalidConfig(f"window_len must be >= 2, got {self.window_len}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise InvalidConfig(f"overlap_fraction must be in [0, 1), got {self.overlap_fraction}")
        if not self.sample_rate_hz > 0:
            raise InvalidConfig("sample_rate_hz must be positive")
        if not 0 <= self.band_low_hz < self.band_high_hz <= self.sample_rate_hz / 2:
            raise InvalidConfig(
                f"need 0 <= low < high <= sample_rate/2, got "
                f"[{self.band_low_hz}, {self.band_high_hz}] at {self.sample_rate_hz} Hz"
            )
        if self.hop < 1:
            raise InvalidConfig("hop must be >= 1; lower the overlap or enlarge the window")

    @property
    def hop(self) -> int:
        return int(round(self.window_len * (1.0 - self.overlap_fraction)))

    @property
    def retained_bins(self) -> np.ndarray:
        """Indices k of rfft bins with band_low <= k * fs / window <= band_high."""
        spacing = self.sample_rate_hz / self.window_len
        k = np.arange(self.window_len // 2 + 1)
        freqs = k * spacing
        return k[(freqs >= self.band_low_hz) & (freqs <= self.band_high_hz)]


def stft_features(x: TimeSeries, cfg: StftConfig) -> TimeSeries:
    """Hann-windowed magnitude spectrogram of a univariate series.

    Output is an (n_frames x n_bins) series with
    n_frames = floor((T - window_len) / hop) + 1.
    """
    if x.n_dims != 1:
        raise InvalidConfig(f"spectrogram input must be univariate, got d={x.n_dims}")
    t_total = x.n_steps
    if t_total < cfg.window_len:
        raise SeriesTooShort(f"need T >= window_len = {cfg.window_len}, got {t_total}")
    signal = x.values[:, 0]
    window = np.hanning(cfg.window_len)
    hop = cfg.hop
    n_frames = (t_total - cfg.window_len) // hop + 1
    bins = cfg.retained_bins
    out = np.empty((n_frames, len(bins)))
    for i in range(n_frames):
        frame = signal[i * hop : i * hop + cfg.window_len] * window
        out[i] = np.abs(np.fft.rfft(frame))[bins]
    return TimeSeries(out)


@dataclass(frozen=True)
class SyntheticSpec:
    """Seeded generator configuration.

    regimes holds one entry per segment: (mean, variance) pairs for the
    Gaussian generator, or coefficient arrays of shape (order, d, d) (a single
    (d, d) matrix means order 1) for the autoregressive one. noise_scale
    multiplies every innovation standard deviation.
    """

    seed: int
    n_steps: int
    change_points: tuple[int, ...]
    regimes: tuple
    noise_scale: float = 1.0

    def __post_init__(self):
        seg = Segmentation(self.n_steps, self.change_points)  # validates ordering
        if len(self.regimes) != seg.n_change_points + 1:
            raise InvalidConfig(
                f"need one regime per segment: {seg.n_change_points + 1} segments, "
                f"{len(self.regimes)} regimes"
            )
        if not self.noise_scale > 0:
            raise InvalidConfig("noise_scale must be positive")

    @property
    def truth(self) -> Segmentation:
        return Segmentation(self.n_steps, self.change_points)


def synth_piecewise_gaussian(spec: SyntheticSpec) -> tuple[TimeSeries, Segmentation]:
    """Per-segment i.i.d. Gaussian draws, deterministic given the seed."""
    rng = np.random.default_rng(spec.seed)
    truth = spec.truth
    chunks = []
    for (a, b), (mean, variance) in zip(truth.segments(), spec.regimes):
        mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        std = np.sqrt(np.atleast_1d(np.asarray(variance, dtype=np.float64)))
        chunks.append(mean + spec.noise_scale * std * rng.standard_normal((b - a, len(mean))))
    return TimeSeries(np.concatenate(chunks)), truth


def synth_piecewise_var(spec: SyntheticSpec) -> tuple[TimeSeries, Segmentation]:
    """Per-segment autoregressive recursions with Gaussian innovations.

    Each segment is warm-started from the previous segment's trailing values
    (zeros before the first segment). Coefficients must be stationary.
    """
    truth = spec.truth
    coeff_sets = [_as_coeffs(c) for c in spec.regimes]
    for coeffs in coeff_sets:
        rho = _companion_spectral_radius(coeffs)
        if rho >= 1.0:
            raise UnstableCoefficients(f"coefficient spectral radius {rho:.3f} >= 1")
    d = coeff_sets[0].shape[1]
    if any(c.shape[1] != d for c in coeff_sets):
        raise InvalidConfig("all regimes must share the same dimension")
    rng = np.random.default_rng(spec.seed)
    max_order = max(c.shape[0] for c in coeff_sets)
    history = np.zeros((max_order, d))
    out = np.empty((spec.n_steps, d))
    pos = 0
    for (a, b), coeffs in zip(truth.segments(), coeff_sets):
        order = coeffs.shape[0]
        for _ in range(a, b):
            value = spec.noise_scale * rng.standard_normal(d)
            for k in range(order):
                value += coeffs[k] @ history[-1 - k]
            out[pos] = value
            history = np.vstack([history[1:], value])
            pos += 1
    return TimeSeries(out), truth


def _as_coeffs(c) -> np.ndarray:
    arr = np.asarray(c, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1, 1)
    elif arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise InvalidConfig(f"coefficients must have shape (order, d, d), got {arr.shape}")
    return arr


def _companion_spectral_radius(coeffs: np.ndarray) -> float:
    order, d, _ = coeffs.shape
    companion = np.zeros((order * d, order * d))
    companion[:d] = np.concatenate(list(coeffs), axis=1)
    if order > 1:
        companion[d:, : (order - 1) * d] = np.eye((order - 1) * d)
    return float(np.max(np.abs(np.linalg.eigvals(companion))))
