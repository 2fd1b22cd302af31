"""Domain types shared by every pipeline stage: calls, antennas, the
timestamp grid, and the detection parameter set.

All times are UTC epoch seconds (ints). The pipeline works on integer grid
indices; absolute times appear only at ingest and display.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

HOUR = 3600
PROFILE_STEP = HOUR       # profile granularity: one hour
PROFILE_PERIOD = 24       # profile period: one day (hours of day 0..23)


class Call(NamedTuple):
    """One CDR row: a user made/received a call at an antenna at a time."""

    user_id: str
    at: int
    antenna_id: str


@dataclass(frozen=True)
class Antenna:
    antenna_id: str
    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")


@dataclass(frozen=True)
class TimeGrid:
    """Regular grid of timestamps; each grid point owns a +/- half_window
    slice of absolute time.

    With half_window == step/2 the windows tile the timeline and a call maps
    to exactly one grid index except at window boundaries, which belong to
    both neighbours (the interval test is inclusive).
    """

    origin: int
    n_steps: int
    step: int = HOUR
    half_window: int = HOUR // 2

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.half_window <= 0:
            raise ValueError("half_window must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")

    def grid_time(self, t: int) -> int:
        return self.origin + t * self.step

    def hour_of_day(self, t: int) -> int:
        return (self.grid_time(t) // HOUR) % PROFILE_PERIOD

    @classmethod
    def spanning(cls, min_at: int, max_at: int, step: int = HOUR,
                 half_window: int = HOUR // 2) -> "TimeGrid":
        """Smallest grid anchored on a whole step that reaches max_at.

        The last window covers max_at whenever half_window == step/2; for
        narrower windows trailing calls may fall in inter-window gaps and are
        counted as out-of-range by ingest.
        """
        if max_at < min_at:
            raise ValueError("empty time span")
        origin = (min_at // step) * step
        span = max_at - origin
        if span <= half_window:
            n = 1
        else:
            n = -(-(span - half_window) // step) + 1
        return cls(origin=origin, n_steps=n, step=step, half_window=half_window)


def grid_index_of(at: int, grid: TimeGrid) -> set[int]:
    """Grid indices t with |at - grid_time(t)| <= half_window.

    Out-of-range times yield the empty set rather than an error.
    """
    lo = at - grid.origin - grid.half_window
    hi = at - grid.origin + grid.half_window
    t_min = -(-lo // grid.step)       # ceil division
    t_max = hi // grid.step
    t_min = max(t_min, 0)
    t_max = min(t_max, grid.n_steps - 1)
    return set(range(t_min, t_max + 1))


@dataclass(frozen=True)
class Params:
    """Detection thresholds, defaulted to the published experiment values."""

    scale: int = 20                    # minimum cluster size
    lifetime: int = 4                  # minimum crowd length in grid steps
    commitment: int = 10               # minimum committed users per step
    commitment_probability: float = 0.2
    similarity: float = 0.2
    min_locations: int = 2             # distinct antennas a crowd must span
    half_window: int = HOUR // 2

    def violations(self) -> list[str]:
        return validate_params(self)


def validate_params(p: Params) -> list[str]:
    """Every violated invariant as a human-readable message; empty iff valid."""
    out = []
    if p.scale < 0:
        out.append("scale below 0")
    if p.lifetime < 2:
        out.append("lifetime below 2")
    if p.commitment < 0:
        out.append("commitment below 0")
    if p.commitment > p.scale:
        out.append("commitment exceeds scale")
    if not (0.0 <= p.commitment_probability <= 1.0):
        out.append("commitment probability outside [0, 1]")
    if not (0.0 <= p.similarity <= 1.0):
        out.append("similarity outside [0, 1]")
    if p.min_locations < 2:
        out.append("min_locations below 2")
    if p.half_window <= 0:
        out.append("half window not positive")
    return out


@dataclass(frozen=True)
class Trajectory:
    """A user's resolved position per grid index, strictly increasing in t."""

    user_id: str
    points: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        ts = [t for t, _ in self.points]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trajectory grid indices must be strictly increasing")
