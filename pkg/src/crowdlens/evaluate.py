"""Scoring against ground truth and run statistics for the service and UI."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .clusters import ClusterDB
from .crowds import Crowd
from .events import UnusualEvent, convex_hull, hull_radius_km, polygon_area_km2
from .ingest import AntennaRegistry, CallIndex
from .model import Params, TimeGrid


@dataclass(frozen=True)
class EventRecord:
    """Minimal event for matching: span in grid indices plus participants.

    origin_epoch anchors the indices in absolute time; when both sides of a
    comparison carry one, spans are compared in absolute seconds so records
    from runs with different grid origins still line up.
    """

    start: int
    end: int
    participants: frozenset[str]
    origin_epoch: Optional[int] = None
    step: int = 3600

    def span_seconds(self) -> Optional[tuple[int, int]]:
        if self.origin_epoch is None:
            return None
        return (self.origin_epoch + self.start * self.step,
                self.origin_epoch + self.end * self.step)


def event_matches(detected: EventRecord, truth: EventRecord) -> bool:
    """Detection matches a planted event iff the spans intersect and the
    detected participants cover at least half of the planted set."""
    a, b = detected.span_seconds(), truth.span_seconds()
    if a is not None and b is not None:
        overlap = min(a[1], b[1]) >= max(a[0], b[0])
    else:
        overlap = min(detected.end, truth.end) >= max(detected.start, truth.start)
    if not overlap:
        return False
    shared = len(detected.participants & truth.participants)
    return 2 * shared >= len(truth.participants)


@dataclass(frozen=True)
class EvalResult:
    matched_truth: int
    matched_detected: int
    detected: int
    truth: int

    @property
    def precision(self) -> Optional[float]:
        if self.detected == 0:
            return None
        return self.matched_detected / self.detected

    @property
    def recall(self) -> Optional[float]:
        if self.truth == 0:
            return None
        return self.matched_truth / self.truth

    def to_dict(self) -> dict:
        return {
            "matched_truth": self.matched_truth,
            "matched_detected": self.matched_detected,
            "detected": self.detected,
            "truth": self.truth,
            "precision": self.precision,
            "recall": self.recall,
        }


def score(detected: Sequence[EventRecord], truth: Sequence[EventRecord]) -> EvalResult:
    """Table-1 protocol: each truth event counts once no matter how many
    detections hit it; precision's numerator counts detections that hit
    anything."""
    matched_truth = sum(
        1 for t in truth if any(event_matches(d, t) for d in detected))
    matched_detected = sum(
        1 for d in detected if any(event_matches(d, t) for t in truth))
    return EvalResult(matched_truth=matched_truth,
                      matched_detected=matched_detected,
                      detected=len(detected), truth=len(truth))


def truth_records(ground_truth: dict) -> list[EventRecord]:
    origin = ground_truth.get("origin_epoch")
    return [EventRecord(start=ev["start"], end=ev["end"],
                        participants=frozenset(ev["participants"]),
                        origin_epoch=origin)
            for ev in ground_truth["events"]]


def detected_records(events: Iterable[UnusualEvent],
                     grid: TimeGrid) -> list[EventRecord]:
    return [EventRecord(start=ev.start, end=ev.end,
                        participants=ev.participants,
                        origin_epoch=grid.origin, step=grid.step)
            for ev in events]


@dataclass(frozen=True)
class ClassifiedCrowd:
    crowd: Crowd
    unusual: bool
    mean_similarity: float


@dataclass
class TimeSeries:
    clusters: list[int]
    candidate_crowds: list[int]
    crowds: list[int]
    unusual_crowds: list[int]
    unusual_events: list[int]
    active_users: list[int]
    total_calls: list[int]

    FIELDS = ("clusters", "candidate_crowds", "crowds", "unusual_crowds",
              "unusual_events", "active_users", "total_calls")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}

    def to_csv_bytes(self) -> bytes:
        out = io.StringIO()
        out.write("t," + ",".join(self.FIELDS) + "\n")
        for t in range(len(self.clusters)):
            row = [str(t)] + [str(getattr(self, name)[t]) for name in self.FIELDS]
            out.write(",".join(row) + "\n")
        return out.getvalue().encode()


def timeseries(grid: TimeGrid, db: ClusterDB, candidate_counts: dict[int, int],
               classified: Sequence[ClassifiedCrowd],
               events: Sequence[UnusualEvent],
               index: Optional[CallIndex] = None) -> TimeSeries:
    """Per-timestamp counts; span-carrying artifacts (crowds, events) count at
    every timestamp they cover."""
    n = grid.n_steps
    ts = TimeSeries(clusters=[0] * n, candidate_crowds=[0] * n, crowds=[0] * n,
                    unusual_crowds=[0] * n, unusual_events=[0] * n,
                    active_users=[0] * n, total_calls=[0] * n)
    for t, clusters in db.items():
        if 0 <= t < n:
            ts.clusters[t] = len(clusters)
    for t, count in candidate_counts.items():
        if 0 <= t < n:
            ts.candidate_crowds[t] = count
    for item in classified:
        for t in range(item.crowd.start, item.crowd.end + 1):
            if 0 <= t < n:
                ts.crowds[t] += 1
                if item.unusual:
                    ts.unusual_crowds[t] += 1
    for ev in events:
        for t in range(ev.start, ev.end + 1):
            if 0 <= t < n:
                ts.unusual_events[t] += 1
    if index is not None:
        for t in range(n):
            ts.active_users[t] = len(index.user_totals[t])
            ts.total_calls[t] = sum(index.user_totals[t].values())
    return ts


def member_update_antennas(index: CallIndex, t: int,
                           members: frozenset[str]) -> list[str]:
    """Antennas where any cluster member placed a call within t's window."""
    out = []
    for antenna_id, users in index.per_t[t].items():
        if not members.isdisjoint(users):
            out.append(antenna_id)
    return sorted(out)


def cluster_geometry(index: CallIndex, registry: AntennaRegistry, t: int,
                     members: frozenset[str]) -> tuple[list[tuple[float, float]], float, float]:
    """(hull, area km^2, radius km) of a cluster's member location updates.

    Members whose every call sits at one antenna give a degenerate hull with
    zero area and radius.
    """
    antennas = member_update_antennas(index, t, members)
    points = [(registry[a].lon, registry[a].lat) for a in antennas if a in registry]
    if not points:
        return [], 0.0, 0.0
    hull = convex_hull(points)
    return hull, polygon_area_km2(hull), hull_radius_km(hull)


@dataclass
class AnalystStats:
    """The four statistic groups of the analyst view, each annotated with the
    parameter whose threshold the UI overlays as a dashed line."""

    cumulative: dict
    detection: dict
    event_monitoring: dict
    cluster_monitoring: dict

    def to_dict(self) -> dict:
        return {
            "cumulative": self.cumulative,
            "detection": self.detection,
            "event_monitoring": self.event_monitoring,
            "cluster_monitoring": self.cluster_monitoring,
        }


def _minmax_series(n: int, spans: Iterable[tuple[int, int, float]]) -> dict:
    lo: list[Optional[float]] = [None] * n
    hi: list[Optional[float]] = [None] * n
    for start, end, value in spans:
        for t in range(max(start, 0), min(end, n - 1) + 1):
            if lo[t] is None or value < lo[t]:
                lo[t] = value
            if hi[t] is None or value > hi[t]:
                hi[t] = value
    return {"min": lo, "max": hi}


def analyst_stats(grid: TimeGrid, params: Params, db: ClusterDB,
                  candidate_counts: dict[int, int],
                  classified: Sequence[ClassifiedCrowd],
                  events: Sequence[UnusualEvent],
                  index: Optional[CallIndex] = None,
                  registry: Optional[AntennaRegistry] = None) -> AnalystStats:
    n = grid.n_steps
    ts = timeseries(grid, db, candidate_counts, classified, events, index)

    def cumsum(xs: list[int]) -> list[int]:
        out, run = [], 0
        for x in xs:
            run += x
            out.append(run)
        return out

    starts_crowds = [0] * n
    for item in classified:
        if 0 <= item.crowd.start < n:
            starts_crowds[item.crowd.start] += 1
    starts_events = [0] * n
    for ev in events:
        if 0 <= ev.start < n:
            starts_events[ev.start] += 1

    cumulative = {
        "clusters": cumsum(ts.clusters),
        "crowds": cumsum(starts_crowds),
        "unusual_events": cumsum(starts_events),
    }
    detection = {
        "clusters": ts.clusters,
        "candidate_crowds": ts.candidate_crowds,
        "crowds": ts.crowds,
        "unusual_events": ts.unusual_events,
    }

    crowd_spans = [(c.crowd.start, c.crowd.end) for c in classified]
    event_monitoring = {
        "lifetime": {**_minmax_series(n, ((s, e, c.crowd.lifetime)
                                          for (s, e), c in zip(crowd_spans, classified))),
                     "threshold": params.lifetime},
        "committed_users": {**_minmax_series(n, ((s, e, len(c.crowd.committed))
                                                 for (s, e), c in zip(crowd_spans, classified))),
                            "threshold": params.commitment},
        "total_users": {**_minmax_series(n, ((s, e, len(c.crowd.all_observed()))
                                             for (s, e), c in zip(crowd_spans, classified))),
                        "threshold": params.scale},
        "similarity": {**_minmax_series(n, ((s, e, c.mean_similarity)
                                            for (s, e), c in zip(crowd_spans, classified))),
                       "threshold": params.similarity},
    }

    size_max = [0] * n
    radius_min: list[float] = [0.0] * n
    for t, clusters in db.items():
        if not (0 <= t < n) or not clusters:
            continue
        size_max[t] = max(len(c.members) for c in clusters)
        if index is not None and registry is not None:
            radii = [cluster_geometry(index, registry, t, c.members)[2]
                     for c in clusters]
            radius_min[t] = min(radii)
    cluster_monitoring = {
        "cluster_size": {"max": size_max, "threshold": params.scale},
        "spatial_radius": {"min": radius_min, "threshold": None},
    }

    return AnalystStats(cumulative=cumulative, detection=detection,
                        event_monitoring=event_monitoring,
                        cluster_monitoring=cluster_monitoring)
