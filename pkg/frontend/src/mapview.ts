// Map layers on a plain coordinate plane scaled to the dataset's bounding
// box: no tile dependency. Antenna coverage is suggested by a raster of
// cells shaded by nearest antenna, a cheap stand-in for a true tessellation.

import type { AntennaInfo, EventPayload, EventCluster } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
  project: (lon: number, lat: number) => [number, number];
}

export function makeViewport(
  antennas: AntennaInfo[],
  width = 640,
  height = 480,
  pad = 20,
): Viewport {
  let minLon = Infinity, maxLon = -Infinity, minLat = Infinity, maxLat = -Infinity;
  for (const a of antennas) {
    minLon = Math.min(minLon, a.lon);
    maxLon = Math.max(maxLon, a.lon);
    minLat = Math.min(minLat, a.lat);
    maxLat = Math.max(maxLat, a.lat);
  }
  if (!antennas.length) {
    minLon = 0; maxLon = 1; minLat = 0; maxLat = 1;
  }
  const spanLon = maxLon - minLon || 1e-6;
  const spanLat = maxLat - minLat || 1e-6;
  const project = (lon: number, lat: number): [number, number] => [
    pad + ((lon - minLon) / spanLon) * (width - 2 * pad),
    height - pad - ((lat - minLat) / spanLat) * (height - 2 * pad),
  ];
  return { width, height, project };
}

/** Cell -> nearest antenna index over a cols x rows raster. */
export function nearestAntennaRaster(
  antennas: AntennaInfo[],
  viewport: Viewport,
  cols = 32,
  rows = 24,
): number[][] {
  const centers = antennas.map((a) => viewport.project(a.lon, a.lat));
  const grid: number[][] = [];
  for (let r = 0; r < rows; r++) {
    const row: number[] = [];
    for (let c = 0; c < cols; c++) {
      const x = ((c + 0.5) / cols) * viewport.width;
      const y = ((r + 0.5) / rows) * viewport.height;
      let best = -1;
      let bestD = Infinity;
      centers.forEach(([ax, ay], i) => {
        const d = (ax - x) ** 2 + (ay - y) ** 2;
        if (d < bestD) {
          bestD = d;
          best = i;
        }
      });
      row.push(best);
    }
    grid.push(row);
  }
  return grid;
}

export interface MapLayer {
  kind: "cluster" | "crowd" | "event";
  color: string;
  path: string;          // SVG path or circle encoded as path
  popup: string;
}

function polygonPath(points: [number, number][]): string {
  if (!points.length) return "";
  const [first, ...rest] = points;
  const parts = [`M${first[0].toFixed(1)},${first[1].toFixed(1)}`];
  for (const p of rest) parts.push(`L${p[0].toFixed(1)},${p[1].toFixed(1)}`);
  parts.push("Z");
  return parts.join(" ");
}

function circlePath(x: number, y: number, r: number): string {
  return (
    `M${(x - r).toFixed(1)},${y.toFixed(1)} ` +
    `a${r},${r} 0 1,0 ${2 * r},0 a${r},${r} 0 1,0 ${-2 * r},0`
  );
}

export function clusterPopup(cluster: EventCluster): string {
  const density = cluster.density === null ? "n/a" : cluster.density.toFixed(1);
  const pois = cluster.pois.length ? cluster.pois.join(", ") : "none";
  return (
    `timestamp ${cluster.t} | users ${cluster.n_users} | ` +
    `area ${cluster.area_km2.toFixed(3)} km2 | density ${density} | POIs: ${pois}`
  );
}

/**
 * Layers visible at the cursor timestamp: green cluster marks for event
 * chain clusters at that hour, blue crowd footprints and red event hulls for
 * spans covering it.
 */
export function layersAt(
  events: EventPayload[],
  cursor: number,
  viewport: Viewport,
  positions: Map<string, [number, number]>,
): MapLayer[] {
  const layers: MapLayer[] = [];
  for (const event of events) {
    if (cursor < event.start || cursor > event.end) continue;
    if (event.hull.length) {
      const pts = event.hull.map(([lon, lat]) => viewport.project(lon, lat));
      layers.push({
        kind: "event",
        color: "#cd2026",
        path: pts.length >= 3
          ? polygonPath(pts)
          : circlePath(pts[0][0], pts[0][1], 10),
        popup: `${event.event_id}: t ${event.start}..${event.end}, ` +
          `${event.participants.length} participants, ${event.n_crowds} crowds`,
      });
    }
    for (const crowd of event.crowds) {
      if (cursor < crowd.start || cursor > crowd.end) continue;
      const pts: [number, number][] = [];
      for (const link of crowd.chain) {
        const pos = positions.get(link.antenna_id);
        if (pos) pts.push(viewport.project(pos[0], pos[1]));
      }
      if (pts.length) {
        layers.push({
          kind: "crowd",
          color: "#205493",
          path: pts.length >= 3
            ? polygonPath(pts)
            : circlePath(pts[0][0], pts[0][1], 7),
          popup: `crowd t ${crowd.start}..${crowd.end}, ` +
            `${crowd.committed.length} committed, ${crowd.distinct_antennas} antennas`,
        });
      }
    }
    for (const cluster of event.clusters) {
      if (cluster.t !== cursor) continue;
      const pos = positions.get(cluster.antenna_id);
      if (!pos) continue;
      const [x, y] = viewport.project(pos[0], pos[1]);
      layers.push({
        kind: "cluster",
        color: "#2e8540",
        path: circlePath(x, y, 5),
        popup: clusterPopup(cluster),
      });
    }
  }
  return layers;
}
