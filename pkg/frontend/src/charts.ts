// Chart geometry as pure data: the DOM layer only concatenates SVG strings.
// Values are taken from API payloads as-is; no smoothing, no resampling.

export interface ChartLine {
  name: string;
  values: (number | null)[];
  color: string;
  dashed?: boolean;
}

export interface ChartModel {
  width: number;
  height: number;
  yMax: number;
  lines: { name: string; color: string; dashed: boolean; points: string }[];
  threshold: { y: number; value: number } | null;
  cursorX: (t: number) => number;
}

const PAD = 4;

export function buildChart(
  lines: ChartLine[],
  nSteps: number,
  options: { width?: number; height?: number; threshold?: number | null } = {},
): ChartModel {
  const width = options.width ?? 600;
  const height = options.height ?? 120;
  const thresholdValue = options.threshold ?? null;
  let yMax = 1;
  for (const line of lines) {
    for (const v of line.values) {
      if (v !== null && v > yMax) yMax = v;
    }
  }
  if (thresholdValue !== null && thresholdValue > yMax) yMax = thresholdValue;

  const xOf = (t: number) =>
    nSteps <= 1 ? PAD : PAD + (t * (width - 2 * PAD)) / (nSteps - 1);
  const yOf = (v: number) => height - PAD - (v * (height - 2 * PAD)) / yMax;

  const rendered = lines.map((line) => {
    const parts: string[] = [];
    line.values.forEach((v, t) => {
      if (v !== null) parts.push(`${xOf(t).toFixed(2)},${yOf(v).toFixed(2)}`);
    });
    return {
      name: line.name,
      color: line.color,
      dashed: line.dashed ?? false,
      points: parts.join(" "),
    };
  });

  return {
    width,
    height,
    yMax,
    lines: rendered,
    threshold:
      thresholdValue === null ? null : { y: yOf(thresholdValue), value: thresholdValue },
    cursorX: xOf,
  };
}

export interface SeriesBundle {
  clusters: number[];
  crowds: number[];
  unusual_events: number[];
  [k: string]: number[];
}

/** The city-manager headline chart: clusters, crowds, unusual events. */
export function managerChartLines(series: SeriesBundle): ChartLine[] {
  return [
    { name: "clusters", values: series.clusters, color: "#2e8540" },
    { name: "crowds", values: series.crowds, color: "#205493" },
    { name: "unusual events", values: series.unusual_events, color: "#cd2026" },
  ];
}

export function chartSvg(model: ChartModel, cursor: number | null = null): string {
  const parts: string[] = [
    `<svg viewBox="0 0 ${model.width} ${model.height}" preserveAspectRatio="none" class="chart">`,
  ];
  if (model.threshold) {
    parts.push(
      `<line class="threshold" x1="0" x2="${model.width}" ` +
        `y1="${model.threshold.y.toFixed(2)}" y2="${model.threshold.y.toFixed(2)}" ` +
        `stroke="#cd2026" stroke-dasharray="6 4"/>`,
    );
  }
  for (const line of model.lines) {
    if (!line.points) continue;
    const dash = line.dashed ? ' stroke-dasharray="5 3"' : "";
    parts.push(
      `<polyline fill="none" stroke="${line.color}"${dash} points="${line.points}">` +
        `<title>${line.name}</title></polyline>`,
    );
  }
  if (cursor !== null) {
    const x = model.cursorX(cursor).toFixed(2);
    parts.push(`<line class="cursor" x1="${x}" x2="${x}" y1="0" y2="${model.height}" stroke="#555"/>`);
  }
  parts.push("</svg>");
  return parts.join("");
}
