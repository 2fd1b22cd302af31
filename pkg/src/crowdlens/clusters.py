"""Stage 1: cylindrical cluster detection.

At each grid timestamp, users observed at several antennas are resolved to a
single position (most common antenna, with a deterministic tie-break), then
every antenna hosting at least `scale` resolved users becomes a cluster.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import BinaryIO, Iterable

from .ingest import CallIndex
from .model import Params, TimeGrid


@dataclass(frozen=True)
class CylindricalCluster:
    t: int
    antenna_id: str
    members: frozenset[str]
    observations: dict[str, int]   # member -> call count at this antenna

    def __len__(self) -> int:
        return len(self.members)


ClusterDB = dict[int, list[CylindricalCluster]]


def resolve_position(observations: dict[str, list[int]]) -> str:
    """Pick one antenna for a user seen at several within one window.

    Highest call count wins; ties go to the antenna of the earliest call
    among the tied ones, then to the lexicographically smallest antenna id.
    """
    if not observations:
        raise ValueError("no observations to resolve")
    best = None
    for antenna_id, times in observations.items():
        key = (-len(times), min(times), antenna_id)
        if best is None or key < best[0]:
            best = (key, antenna_id)
    return best[1]


def _resolve_key(count: int, first_at: int, antenna_id: str):
    return (-count, first_at, antenna_id)


def detect_clusters(index: CallIndex, t: int, params: Params) -> list[CylindricalCluster]:
    """Clusters at grid index t: one per antenna whose resolved user set has
    size >= params.scale. Member sets are disjoint across the result."""
    antennas = index.per_t[t]
    if not antennas:
        return []
    resolved: dict[str, tuple] = {}
    multi = index.user_totals[t]
    for antenna_id, users in antennas.items():
        for user_id, (count, first_at) in users.items():
            key = _resolve_key(count, first_at, antenna_id)
            if multi[user_id] == count:   # single-antenna user, no contest
                resolved[user_id] = key
                continue
            prev = resolved.get(user_id)
            if prev is None or key < prev:
                resolved[user_id] = key

    by_antenna: dict[str, list[str]] = {}
    for user_id, key in resolved.items():
        by_antenna.setdefault(key[2], []).append(user_id)

    out = []
    for antenna_id in sorted(by_antenna):
        users = by_antenna[antenna_id]
        if len(users) < params.scale or not users:
            continue
        counts = antennas[antenna_id]
        out.append(CylindricalCluster(
            t=t,
            antenna_id=antenna_id,
            members=frozenset(users),
            observations={u: counts[u][0] for u in sorted(users)},
        ))
    return out


def cluster_stream(index: CallIndex, grid: TimeGrid, params: Params,
                   workers: int = 1) -> ClusterDB:
    """detect_clusters at every grid index. Timestamps are independent, so
    they may be fanned out across workers; results are identical either way."""
    ts = range(grid.n_steps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda t: detect_clusters(index, t, params), ts))
    else:
        results = [detect_clusters(index, t, params) for t in ts]
    return {t: res for t, res in zip(ts, results)}


def dump_clusters(db: ClusterDB, out: BinaryIO) -> None:
    """JSON-lines dump, one object per cluster, for debugging and oracles."""
    for t in sorted(db):
        for cluster in db[t]:
            line = json.dumps({
                "t": cluster.t,
                "antenna_id": cluster.antenna_id,
                "members": sorted(cluster.members),
            }, separators=(",", ":"))
            out.write(line.encode() + b"\n")


def load_clusters(source: BinaryIO | Iterable[bytes]) -> ClusterDB:
    db: ClusterDB = {}
    for raw in source:
        if not raw.strip():
            continue
        obj = json.loads(raw)
        cluster = CylindricalCluster(
            t=obj["t"],
            antenna_id=obj["antenna_id"],
            members=frozenset(obj["members"]),
            observations={u: 1 for u in obj["members"]},
        )
        db.setdefault(cluster.t, []).append(cluster)
    for clusters in db.values():
        clusters.sort(key=lambda c: c.antenna_id)
    return db
