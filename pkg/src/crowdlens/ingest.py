"""CSV ingest: antenna registry, call parsing and the per-timestamp call index.

Canonical call format is `user_id,timestamp,antenna_id` with an ISO-8601 UTC
timestamp; the four-column `user_id,date,time,antenna_id` form is accepted for
compatibility and merged. Malformed rows are skipped and counted, never fatal:
real CDR exports are dirty and the pipeline has to degrade gracefully.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import BinaryIO, Iterable

from .model import Antenna, Call, TimeGrid, grid_index_of

_EPOCH_ORDINAL = date(1970, 1, 1).toordinal()


class IngestError(ValueError):
    pass


@dataclass
class AntennaRegistry:
    antennas: dict[str, Antenna] = field(default_factory=dict)

    def __contains__(self, antenna_id: str) -> bool:
        return antenna_id in self.antennas

    def __len__(self) -> int:
        return len(self.antennas)

    def __getitem__(self, antenna_id: str) -> Antenna:
        return self.antennas[antenna_id]

    def positions(self) -> dict[str, tuple[float, float]]:
        return {a.antenna_id: (a.lon, a.lat) for a in self.antennas.values()}


@dataclass
class IngestReport:
    admitted: int = 0
    unknown_antenna: int = 0
    out_of_range: int = 0
    malformed: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "admitted": self.admitted,
            "unknown_antenna": self.unknown_antenna,
            "out_of_range": self.out_of_range,
            "malformed": self.malformed,
        })


@dataclass
class CallIndex:
    """Per grid index: antenna -> user -> (observation count, earliest time).

    Aggregated form of the window observations; totals preserve the number of
    admitted (call, index) pairs.
    """

    grid: TimeGrid
    per_t: list[dict[str, dict[str, tuple[int, int]]]]
    user_totals: list[dict[str, int]]   # per t: user -> observations at t
    total_observations: int = 0

    @classmethod
    def empty(cls, grid: TimeGrid) -> "CallIndex":
        return cls(grid=grid,
                   per_t=[{} for _ in range(grid.n_steps)],
                   user_totals=[{} for _ in range(grid.n_steps)])

    def add(self, t: int, antenna_id: str, user_id: str, at: int) -> None:
        users = self.per_t[t].setdefault(antenna_id, {})
        prev = users.get(user_id)
        if prev is None:
            users[user_id] = (1, at)
        else:
            users[user_id] = (prev[0] + 1, min(prev[1], at))
        totals = self.user_totals[t]
        totals[user_id] = totals.get(user_id, 0) + 1
        self.total_observations += 1

    def observation_count(self, t: int, antenna_id: str, user_id: str) -> int:
        users = self.per_t[t].get(antenna_id)
        if not users:
            return 0
        entry = users.get(user_id)
        return entry[0] if entry else 0

    def user_total(self, t: int, user_id: str) -> int:
        return self.user_totals[t].get(user_id, 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CallIndex):
            return NotImplemented
        return (self.grid == other.grid and self.per_t == other.per_t
                and self.user_totals == other.user_totals
                and self.total_observations == other.total_observations)


def _text_lines(source: BinaryIO | Iterable[str]):
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    return source


def load_antennas(source: BinaryIO) -> AntennaRegistry:
    """Parse antennas.csv (`antenna_id,longitude,latitude`, decimal degrees)."""
    reader = csv.reader(_text_lines(source))
    registry = AntennaRegistry()
    for lineno, row in enumerate(reader, start=1):
        if lineno == 1:
            continue  # header
        if not row:
            continue
        if len(row) != 3:
            raise IngestError(f"line {lineno}: expected 3 columns, got {len(row)}")
        antenna_id, lon_s, lat_s = row
        try:
            antenna = Antenna(antenna_id, float(lon_s), float(lat_s))
        except ValueError as exc:
            raise IngestError(f"line {lineno}: {exc}") from None
        if antenna_id in registry:
            raise IngestError(f"duplicate antenna id: {antenna_id}")
        registry.antennas[antenna_id] = antenna
    if len(registry) == 0:
        raise IngestError("no antennas")
    return registry


def _parse_iso_utc(ts: str, date_cache: dict[str, int]) -> int:
    """Epoch seconds for `YYYY-MM-DDTHH:MM:SS` with optional trailing Z.

    Hand-rolled because datetime.fromisoformat on Python 3.10 rejects 'Z' and
    this sits on the 2M-row hot path.
    """
    day = ts[:10]
    midnight = date_cache.get(day)
    if midnight is None:
        y, m, d = int(day[0:4]), int(day[5:7]), int(day[8:10])
        midnight = (date(y, m, d).toordinal() - _EPOCH_ORDINAL) * 86400
        date_cache[day] = midnight
    if ts[10] != "T":
        raise ValueError(f"bad timestamp: {ts!r}")
    tail = ts[11:]
    if tail.endswith("Z"):
        tail = tail[:-1]
    if len(tail) != 8 or tail[2] != ":" or tail[5] != ":":
        raise ValueError(f"bad timestamp: {ts!r}")
    sec = int(tail[0:2]) * 3600 + int(tail[3:5]) * 60 + int(tail[6:8])
    if sec >= 86400:
        raise ValueError(f"bad timestamp: {ts!r}")
    return midnight + sec


def iso_utc(at: int) -> str:
    return datetime.fromtimestamp(at, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def load_calls(source: BinaryIO, registry: AntennaRegistry,
               grid: TimeGrid) -> tuple[list[Call], CallIndex, IngestReport]:
    """Stream calls.csv into a call list plus the per-timestamp index.

    Admitted calls are indexed under every grid index their timestamp maps to.
    Rows referencing unknown antennas, falling outside the grid, or failing to
    parse are skipped and tallied in the report.
    """
    if len(registry) == 0:
        raise IngestError("antenna registry is empty")
    reader = csv.reader(_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty calls file") from None
    cols = [c.strip().lower() for c in header]
    if cols == ["user_id", "timestamp", "antenna_id"]:
        split_form = False
    elif cols == ["user_id", "date", "time", "antenna_id"]:
        split_form = True
    else:
        raise IngestError(f"unrecognized calls header: {header}")

    calls: list[Call] = []
    index = CallIndex.empty(grid)
    report = IngestReport()
    date_cache: dict[str, int] = {}
    known = registry.antennas
    intern = sys.intern
    # Window membership is an affine function of time; precompute the bounds.
    origin, step, half, n_steps = grid.origin, grid.step, grid.half_window, grid.n_steps

    for row in reader:
        if not row:
            continue
        try:
            if split_form:
                user_id, day_s, time_s, antenna_id = row
                at = _parse_iso_utc(day_s + "T" + time_s, date_cache)
            else:
                user_id, ts, antenna_id = row
                at = _parse_iso_utc(ts, date_cache)
        except ValueError:
            report.malformed += 1
            continue
        if antenna_id not in known:
            report.unknown_antenna += 1
            continue
        lo = at - origin - half
        hi = at - origin + half
        t_min = max(-(-lo // step), 0)
        t_max = min(hi // step, n_steps - 1)
        if t_min > t_max:
            report.out_of_range += 1
            continue
        user_id = intern(user_id)
        antenna_id = intern(antenna_id)
        calls.append(Call(user_id, at, antenna_id))
        for t in range(t_min, t_max + 1):
            index.add(t, antenna_id, user_id, at)
        report.admitted += 1
    return calls, index, report


def load_calls_auto(source: BinaryIO, registry: AntennaRegistry,
                    step: int = 3600, half_window: int = 1800,
                    ) -> tuple[list[Call], CallIndex, IngestReport, TimeGrid]:
    """load_calls with the grid derived from the data's own time span."""
    if len(registry) == 0:
        raise IngestError("antenna registry is empty")
    reader = csv.reader(_text_lines(source))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty calls file") from None
    cols = [c.strip().lower() for c in header]
    if cols == ["user_id", "timestamp", "antenna_id"]:
        split_form = False
    elif cols == ["user_id", "date", "time", "antenna_id"]:
        split_form = True
    else:
        raise IngestError(f"unrecognized calls header: {header}")

    report = IngestReport()
    date_cache: dict[str, int] = {}
    known = registry.antennas
    intern = sys.intern
    parsed: list[Call] = []
    for row in reader:
        if not row:
            continue
        try:
            if split_form:
                user_id, day_s, time_s, antenna_id = row
                at = _parse_iso_utc(day_s + "T" + time_s, date_cache)
            else:
                user_id, ts, antenna_id = row
                at = _parse_iso_utc(ts, date_cache)
        except ValueError:
            report.malformed += 1
            continue
        if antenna_id not in known:
            report.unknown_antenna += 1
            continue
        parsed.append(Call(intern(user_id), at, intern(antenna_id)))
    if not parsed:
        raise IngestError("no admissible calls to derive a grid from")
    min_at = min(c.at for c in parsed)
    max_at = max(c.at for c in parsed)
    grid = TimeGrid.spanning(min_at, max_at, step=step, half_window=half_window)

    index = CallIndex.empty(grid)
    calls: list[Call] = []
    origin, n_steps = grid.origin, grid.n_steps
    for call in parsed:
        lo = call.at - origin - half_window
        hi = call.at - origin + half_window
        t_min = max(-(-lo // step), 0)
        t_max = min(hi // step, n_steps - 1)
        if t_min > t_max:
            report.out_of_range += 1
            continue
        calls.append(call)
        for t in range(t_min, t_max + 1):
            index.add(t, call.antenna_id, call.user_id, call.at)
        report.admitted += 1
    return calls, index, report, grid


def write_calls_csv(calls: Iterable[Call], out: BinaryIO) -> int:
    """Canonical-form dump of admitted calls; returns rows written."""
    text = io.TextIOWrapper(out, encoding="utf-8", newline="")
    writer = csv.writer(text)
    writer.writerow(["user_id", "timestamp", "antenna_id"])
    n = 0
    for call in calls:
        writer.writerow([call.user_id, iso_utc(call.at), call.antenna_id])
        n += 1
    text.flush()
    text.detach()
    return n


def inter_call_gap_histogram(calls: Iterable[Call]) -> dict[int, float]:
    """Fraction of consecutive same-user call gaps per whole-hour bucket.

    Gaps round to the nearest hour (half-up). Empty when no user has two
    calls; otherwise fractions sum to 1.
    """
    per_user: dict[str, list[int]] = {}
    for call in calls:
        per_user.setdefault(call.user_id, []).append(call.at)
    counts: dict[int, int] = {}
    total = 0
    for times in per_user.values():
        times.sort()
        for a, b in zip(times, times[1:]):
            bucket = (b - a + 1800) // 3600
            counts[bucket] = counts.get(bucket, 0) + 1
            total += 1
    if total == 0:
        return {}
    return {bucket: n / total for bucket, n in sorted(counts.items())}
