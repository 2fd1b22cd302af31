"""Stage 4: connect unusual crowds into unusual events.

Two unusual crowds belong to one event when their spans intersect and they
share at least half of their combined committed users; events are the
connected components of that relation. Convex hulls of the involved antenna
positions provide the display geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .crowds import Crowd

EARTH_RADIUS_KM = 6371.0088


def are_connected(c_i: Crowd, c_j: Crowd) -> bool:
    """Def-7 relation: interval overlap plus majority user sharing."""
    if min(c_i.end, c_j.end) < max(c_i.start, c_j.start):
        return False
    inter = len(c_i.committed & c_j.committed)
    union = len(c_i.committed | c_j.committed)
    return inter >= (union + 1) // 2


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class UnusualEvent:
    event_id: str
    crowds: tuple[Crowd, ...]
    start: int
    end: int
    participants: frozenset[str]
    hull: tuple[tuple[float, float], ...]


def build_events(unusual: Sequence[Crowd],
                 positions: Optional[dict[str, tuple[float, float]]] = None) -> list[UnusualEvent]:
    """Connected components of the pairwise relation; singletons included.

    Output is ordered by (span start, participant count descending) and is
    invariant under permutations of the input.
    """
    order = sorted(range(len(unusual)),
                   key=lambda i: (unusual[i].start, unusual[i].antenna_sequence(),
                                  sorted(unusual[i].committed)))
    crowds = [unusual[i] for i in order]
    uf = UnionFind(len(crowds))
    for i in range(len(crowds)):
        for j in range(i + 1, len(crowds)):
            if are_connected(crowds[i], crowds[j]):
                uf.union(i, j)
    groups: dict[int, list[Crowd]] = {}
    for i, crowd in enumerate(crowds):
        groups.setdefault(uf.find(i), []).append(crowd)

    events = []
    for members in groups.values():
        members.sort(key=lambda c: (c.start, c.antenna_sequence()))
        participants = frozenset().union(*(c.committed for c in members))
        start = min(c.start for c in members)
        end = max(c.end for c in members)
        hull: tuple[tuple[float, float], ...] = ()
        if positions is not None:
            points = [positions[cc.antenna_id] for c in members for cc in c.chain
                      if cc.antenna_id in positions]
            if points:
                hull = tuple(convex_hull(points))
        events.append((start, -len(participants), members, participants, end, hull))

    events.sort(key=lambda e: (e[0], e[1], tuple(c.antenna_sequence() for c in e[2])))
    out = []
    for n, (start, _, members, participants, end, hull) in enumerate(events, start=1):
        out.append(UnusualEvent(
            event_id=f"ev-{n:04d}",
            crowds=tuple(members),
            start=start,
            end=end,
            participants=participants,
            hull=hull,
        ))
    return out


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    """Counterclockwise convex hull (Andrew's monotone chain); collinear
    interior points are excluded. One or two distinct points give a
    degenerate point/segment polygon."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if not pts:
        raise ValueError("no points")
    if len(pts) <= 2:
        return pts
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:   # all points collinear
        return [pts[0], pts[-1]]
    return hull


def point_in_hull(point: tuple[float, float],
                  hull: Sequence[tuple[float, float]], eps: float = 1e-12) -> bool:
    """Containment test against a counterclockwise hull, boundary inclusive."""
    if len(hull) == 1:
        return (abs(point[0] - hull[0][0]) <= eps
                and abs(point[1] - hull[0][1]) <= eps)
    if len(hull) == 2:
        a, b = hull
        if abs(_cross(a, b, point)) > eps:
            return False
        lo_x, hi_x = min(a[0], b[0]) - eps, max(a[0], b[0]) + eps
        lo_y, hi_y = min(a[1], b[1]) - eps, max(a[1], b[1]) + eps
        return lo_x <= point[0] <= hi_x and lo_y <= point[1] <= hi_y
    return all(_cross(a, b, point) >= -eps
               for a, b in zip(hull, list(hull[1:]) + [hull[0]]))


def polygon_area_km2(hull: Sequence[tuple[float, float]]) -> float:
    """Shoelace area of a lon/lat polygon under an equirectangular projection
    at the polygon's mean latitude; adequate at city scale. Degenerate
    polygons have zero area."""
    if len(hull) < 3:
        return 0.0
    mean_lat = sum(lat for _, lat in hull) / len(hull)
    kx = EARTH_RADIUS_KM * math.cos(math.radians(mean_lat)) * math.pi / 180.0
    ky = EARTH_RADIUS_KM * math.pi / 180.0
    area2 = 0.0
    for (lon_a, lat_a), (lon_b, lat_b) in zip(hull, list(hull[1:]) + [hull[0]]):
        area2 += (lon_a * kx) * (lat_b * ky) - (lon_b * kx) * (lat_a * ky)
    return abs(area2) / 2.0


def hull_radius_km(hull: Sequence[tuple[float, float]]) -> float:
    """Largest distance from the hull centroid to a vertex, in km."""
    if len(hull) <= 1:
        return 0.0
    cx = sum(p[0] for p in hull) / len(hull)
    cy = sum(p[1] for p in hull) / len(hull)
    mean_lat = cy
    kx = EARTH_RADIUS_KM * math.cos(math.radians(mean_lat)) * math.pi / 180.0
    ky = EARTH_RADIUS_KM * math.pi / 180.0
    return max(math.hypot((p[0] - cx) * kx, (p[1] - cy) * ky) for p in hull)
