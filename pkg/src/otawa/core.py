"""Core types: time series, segmentations, and search constraints.

All types are immutable after construction and safe to share across threads.
Segments are half-open index intervals [a, b), and change points are 0-based
interior boundaries, so a segmentation with change points (t1, ..., tm) of a
series of length T induces the m+1 segments [0,t1), [t1,t2), ..., [tm,T).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, NonFinite


class TimeSeries:
    """A T x d matrix of finite real-valued observations.

    1-D input is treated as a single-dimension series of shape (T, 1).
    Optional per-row timestamps (numpy datetime64) enable calendar-based
    preprocessing such as daily averaging.
    """

    __slots__ = ("values", "timestamps")

    def __init__(self, values, timestamps=None):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise InvalidConfig(f"series must be 1-D or 2-D, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise InvalidConfig(f"series needs at least 2 time steps, got {arr.shape[0]}")
        if arr.shape[1] < 1:
            raise InvalidConfig("series needs at least 1 dimension")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("series contains NaN or infinite entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if timestamps is not None:
            timestamps = np.asarray(timestamps)
            if timestamps.shape[0] != arr.shape[0]:
                raise InvalidConfig(
                    f"timestamps length {timestamps.shape[0]} != n_steps {arr.shape[0]}"
                )
            timestamps = timestamps.copy()
            timestamps.flags.writeable = False
        object.__setattr__(self, "timestamps", timestamps)

    def __setattr__(self, name, value):
        raise AttributeError("TimeSeries is immutable")

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    def __repr__(self) -> str:
        return f"TimeSeries(n_steps={self.n_steps}, n_dims={self.n_dims})"


class Segmentation:
    """An ordered set of interior change points partitioning [0, T).

    The empty list is valid and denotes a single segment covering the whole
    series. Boundary indices 0 and T are never stored.
    """

    __slots__ = ("n_steps", "change_points")

    def __init__(self, n_steps: int, change_points=()):
        n_steps = int(n_steps)
        if n_steps < 2:
            raise InvalidConfig(f"n_steps must be >= 2, got {n_steps}")
        cps = tuple(int(c) for c in change_points)
        prev = 0
        for c in cps:
            if c <= prev or c >= n_steps:
                raise InvalidConfig(
                    f"change points must be strictly increasing in (0, {n_steps}), got {cps}"
                )
            prev = c
        object.__setattr__(self, "n_steps", n_steps)
        object.__setattr__(self, "change_points", cps)

    def __setattr__(self, name, value):
        raise AttributeError("Segmentation is immutable")

    @property
    def n_change_points(self) -> int:
        return len(self.change_points)

    def segments(self) -> list[tuple[int, int]]:
        """Return the m+1 half-open (start, end) intervals tiling [0, T)."""
        bounds = (0,) + self.change_points + (self.n_steps,)
        return list(zip(bounds[:-1], bounds[1:]))

    def satisfies(self, constraints: "Constraints") -> bool:
        return satisfies(self, constraints)

    def to_json(self) -> dict:
        return {"n_steps": self.n_steps, "change_points": list(self.change_points)}

    @classmethod
    def from_json(cls, obj: dict) -> "Segmentation":
        return cls(obj["n_steps"], obj["change_points"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Segmentation):
            return NotImplemented
        return self.n_steps == other.n_steps and self.change_points == other.change_points

    def __hash__(self) -> int:
        return hash((self.n_steps, self.change_points))

    def __repr__(self) -> str:
        return f"Segmentation(n_steps={self.n_steps}, change_points={list(self.change_points)})"


@dataclass(frozen=True)
class Constraints:
    """Search-space constraints: minimum segment length and boundary grid.

    A segmentation satisfies the constraints iff every segment has length
    >= min_segment_len and every interior change point is a multiple of
    resolution.
    """

    min_segment_len: int = 1
    resolution: int = 1

    def __post_init__(self):
        if self.min_segment_len < 1:
            raise InvalidConfig(f"min_segment_len must be >= 1, got {self.min_segment_len}")
        if self.resolution < 1:
            raise InvalidConfig(f"resolution must be >= 1, got {self.resolution}")


def segments(seg: Segmentation) -> list[tuple[int, int]]:
    """Half-open (start, end) intervals induced by a segmentation, in order."""
    return seg.segments()


def satisfies(seg: Segmentation, constraints: Constraints) -> bool:
    """True iff all segment lengths >= S and all change points are multiples of R."""
    s, r = constraints.min_segment_len, constraints.resolution
    for a, b in seg.segments():
        if b - a < s:
            return False
    return all(c % r == 0 for c in seg.change_points)
