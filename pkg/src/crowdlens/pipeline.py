"""End-to-end detection: ingest -> clusters -> crowds -> classification ->
events, plus the JSON artifact rendering shared by the CLI and the service."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Optional

from .clusters import ClusterDB, cluster_stream
from .crowds import Crowd, crowd_to_dict, mine_closed_crowds_with_stats
from .evaluate import (AnalystStats, ClassifiedCrowd, TimeSeries, analyst_stats,
                       cluster_geometry, timeseries)
from .events import UnusualEvent, build_events
from .ingest import (AntennaRegistry, Call, CallIndex, IngestReport,
                     load_antennas, load_calls_auto)
from .model import Params, TimeGrid
from .profiles import (ProfileStore, build_profiles, classify_unusual,
                       hour_of_day_windows)


@dataclass
class Dataset:
    """Parsed inputs shared by every detection run over the same files."""

    registry: AntennaRegistry
    calls: list[Call]
    index: CallIndex
    grid: TimeGrid
    report: IngestReport
    profiles: ProfileStore
    pois: dict[str, list[str]] = field(default_factory=dict)


def load_dataset(calls_source: BinaryIO, antennas_source: BinaryIO,
                 step: int = 3600, half_window: int = 1800,
                 pois_source: Optional[BinaryIO] = None) -> Dataset:
    registry = load_antennas(antennas_source)
    calls, index, report, grid = load_calls_auto(
        calls_source, registry, step=step, half_window=half_window)
    profiles = build_profiles(calls, grid)
    pois = load_pois(pois_source) if pois_source is not None else {}
    return Dataset(registry=registry, calls=calls, index=index, grid=grid,
                   report=report, profiles=profiles, pois=pois)


def load_dataset_from_paths(calls_path: str | Path, antennas_path: str | Path,
                            step: int = 3600, half_window: int = 1800,
                            pois_path: Optional[str | Path] = None) -> Dataset:
    with open(antennas_path, "rb") as antennas_source:
        with open(calls_path, "rb") as calls_source:
            if pois_path is not None:
                with open(pois_path, "rb") as pois_source:
                    return load_dataset(calls_source, antennas_source,
                                        step, half_window, pois_source)
            return load_dataset(calls_source, antennas_source, step, half_window)


def load_pois(source: BinaryIO) -> dict[str, list[str]]:
    """pois.csv: header `antenna_id,name`; several rows per antenna allowed."""
    text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(text)
    out: dict[str, list[str]] = {}
    for lineno, row in enumerate(reader, start=1):
        if lineno == 1 or not row:
            continue
        if len(row) != 2:
            raise ValueError(f"pois line {lineno}: expected 2 columns")
        out.setdefault(row[0], []).append(row[1])
    return out


@dataclass
class DetectionRun:
    params: Params
    grid: TimeGrid
    db: ClusterDB
    classified: list[ClassifiedCrowd]
    events: list[UnusualEvent]
    candidate_counts: dict[int, int]
    series: TimeSeries
    stats: AnalystStats

    @property
    def crowds(self) -> list[Crowd]:
        return [c.crowd for c in self.classified]

    @property
    def unusual(self) -> list[Crowd]:
        return [c.crowd for c in self.classified if c.unusual]


def run_detection(dataset: Dataset, params: Params,
                  exclude_crowd_window: bool = True,
                  workers: int = 1) -> DetectionRun:
    """The four detection stages over a loaded dataset.

    exclude_crowd_window leaves each crowd's own calls out of the profile
    fractions during classification; without it a crowd's calls certify their
    own routine and similarity saturates.
    """
    grid = dataset.grid
    db = cluster_stream(dataset.index, grid, params, workers=workers)
    crowds, candidate_counts = mine_closed_crowds_with_stats(db, params)
    classified = []
    exclude = dataset.index if exclude_crowd_window else None
    hod_windows = hour_of_day_windows(grid) if exclude is not None else None
    for crowd in crowds:
        unusual, report = classify_unusual(crowd, dataset.profiles, params,
                                           grid, exclude_index=exclude,
                                           hod_windows=hod_windows)
        classified.append(ClassifiedCrowd(crowd=crowd, unusual=unusual,
                                          mean_similarity=report.mean))
    events = build_events([c.crowd for c in classified if c.unusual],
                          positions=dataset.registry.positions())
    series = timeseries(grid, db, candidate_counts, classified, events,
                        dataset.index)
    stats = analyst_stats(grid, params, db, candidate_counts, classified,
                          events, dataset.index, dataset.registry)
    return DetectionRun(params=params, grid=grid, db=db, classified=classified,
                        events=events, candidate_counts=candidate_counts,
                        series=series, stats=stats)


def event_to_dict(event: UnusualEvent, dataset: Dataset) -> dict:
    clusters = []
    for crowd in event.crowds:
        for link in crowd.chain:
            hull, area, _radius = cluster_geometry(dataset.index, dataset.registry,
                                                   link.t, link.observed)
            clusters.append({
                "t": link.t,
                "antenna_id": link.antenna_id,
                "n_users": len(link.observed),
                "area_km2": area,
                "density": (len(link.observed) / area) if area > 0 else None,
                "pois": dataset.pois.get(link.antenna_id, []),
            })
    return {
        "event_id": event.event_id,
        "start": event.start,
        "end": event.end,
        "n_crowds": len(event.crowds),
        "participants": sorted(event.participants),
        "hull": [[lon, lat] for lon, lat in event.hull],
        "crowds": [crowd_to_dict(c) for c in event.crowds],
        "clusters": clusters,
    }


def events_payload(run: DetectionRun, dataset: Dataset) -> dict:
    return {
        "origin_epoch": run.grid.origin,
        "step": run.grid.step,
        "n_steps": run.grid.n_steps,
        "events": [event_to_dict(ev, dataset) for ev in run.events],
    }


def timeseries_payload(run: DetectionRun) -> dict:
    return {
        "origin_epoch": run.grid.origin,
        "step": run.grid.step,
        "n_steps": run.grid.n_steps,
        "series": run.series.to_dict(),
    }


def summary_counts(run: DetectionRun) -> dict:
    return {
        "clusters": sum(len(cs) for cs in run.db.values()),
        "crowds": len(run.classified),
        "unusual_crowds": len(run.unusual),
        "unusual_events": len(run.events),
    }


def render_json(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
