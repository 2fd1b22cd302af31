import { describe, expect, it } from "vitest";

import { buildChart, chartSvg, managerChartLines } from "../src/charts.js";
import type { SeriesPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const payload = fixture<SeriesPayload>("timeseries.json");

describe("manager chart from a recorded run", () => {
  it("keeps every payload value, element for element", () => {
    const lines = managerChartLines(payload.series);
    expect(lines.map((l) => l.name)).toEqual(["clusters", "crowds", "unusual events"]);
    expect(lines[0].values).toEqual(payload.series.clusters);
    expect(lines[1].values).toEqual(payload.series.crowds);
    expect(lines[2].values).toEqual(payload.series.unusual_events);

    const model = buildChart(lines, payload.n_steps);
    for (const [i, line] of lines.entries()) {
      const points = model.lines[i].points.split(" ");
      expect(points).toHaveLength(line.values.length);
      // y-coordinates decode back to the payload values (no smoothing)
      const pad = 4;
      const height = model.height;
      // svg coordinates carry two decimals; decode within that grain
      line.values.forEach((v, t) => {
        const y = parseFloat(points[t].split(",")[1]);
        const decoded = ((height - pad - y) * model.yMax) / (height - 2 * pad);
        expect(Math.abs(decoded - (v as number))).toBeLessThan(model.yMax * 1e-4 + 0.005);
      });
    }
  });

  it("matches the frozen snapshot of chart geometry", () => {
    const model = buildChart(managerChartLines(payload.series), payload.n_steps);
    expect({
      yMax: model.yMax,
      firstPoints: model.lines.map((l) => l.points.split(" ").slice(0, 3)),
    }).toMatchSnapshot();
  });
});

describe("chart scaffolding", () => {
  it("skips null gaps instead of inventing values", () => {
    const model = buildChart(
      [{ name: "x", values: [1, null, 3], color: "#000" }],
      3,
    );
    expect(model.lines[0].points.split(" ")).toHaveLength(2);
  });

  it("places the dashed threshold line at the right height", () => {
    const model = buildChart(
      [{ name: "x", values: [0, 10], color: "#000" }],
      2,
      { threshold: 5 },
    );
    expect(model.threshold).not.toBeNull();
    const mid = model.height / 2;
    expect(model.threshold!.y).toBeCloseTo(mid, 0);
    const svg = chartSvg(model);
    expect(svg).toContain("stroke-dasharray");
  });

  it("draws a cursor line at the requested timestamp", () => {
    const model = buildChart(
      [{ name: "x", values: [0, 1, 2, 3], color: "#000" }],
      4,
    );
    const svg = chartSvg(model, 2);
    expect(svg).toContain(`class="cursor"`);
    expect(svg).toContain(`x1="${model.cursorX(2).toFixed(2)}"`);
  });

  it("raises yMax to cover the threshold", () => {
    const model = buildChart(
      [{ name: "x", values: [1, 2], color: "#000" }],
      2,
      { threshold: 10 },
    );
    expect(model.yMax).toBe(10);
  });
});
