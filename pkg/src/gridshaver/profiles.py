"""Piecewise-linear time profiles used for irradiance, temperature and loads."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field


@dataclass(frozen=True)
class PiecewiseLinear:
    """Deterministic piecewise-linear function of time.

    ``points`` is a sequence of (t, value) breakpoints with strictly
    increasing times; evaluation interpolates linearly and raises outside
    the covered interval so that gaps surface during validation instead of
    silently extrapolating mid-run.
    """

    points: tuple[tuple[float, float], ...]
    _times: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.points) < 1:
            raise ValueError("profile needs at least one breakpoint")
        times = tuple(t for t, _ in self.points)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("breakpoint times must be strictly increasing")
        object.__setattr__(self, "_times", times)

    @classmethod
    def from_pairs(cls, pairs) -> "PiecewiseLinear":
        return cls(tuple((float(t), float(v)) for t, v in pairs))

    @classmethod
    def constant(cls, value: float, t_end: float) -> "PiecewiseLinear":
        return cls(((0.0, float(value)), (float(t_end), float(value))))

    @property
    def t_start(self) -> float:
        return self._times[0]

    @property
    def t_end(self) -> float:
        return self._times[-1]

    def covers(self, t_start: float, t_end: float) -> bool:
        return self.t_start <= t_start and self.t_end >= t_end

    def __call__(self, t: float) -> float:
        if not self.t_start <= t <= self.t_end:
            raise ValueError(
                f"t={t} outside profile domain [{self.t_start}, {self.t_end}]"
            )
        idx = bisect_right(self._times, t)
        if idx == len(self._times):
            return self.points[-1][1]
        if idx == 0:  # t == t_start handled above; defensive
            return self.points[0][1]
        t0, v0 = self.points[idx - 1]
        t1, v1 = self.points[idx]
        if t == t0:
            return v0
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def values_in(self, lo: float, hi: float) -> list[float]:
        """Breakpoint values with times inside [lo, hi] (fixture checks)."""
        return [v for t, v in self.points if lo <= t <= hi]
