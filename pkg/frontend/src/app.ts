// DOM wiring: everything displayable is computed by the pure modules; this
// file only places strings and numbers into elements and routes events.

import { ApiClient, ApiError } from "./api.js";
import { buildChart, chartSvg, managerChartLines } from "./charts.js";
import { thresholdHints } from "./hints.js";
import { clusterPopup, layersAt, makeViewport, nearestAntennaRaster } from "./mapview.js";
import { DEFAULT_PARAMS, PARAM_FIELDS, toOverrides, validateParams } from "./params.js";
import { clampCursor, decodeHash, encodeHash, INITIAL_STATE, ViewState } from "./state.js";
import type {
  AnalystPayload,
  AntennaInfo,
  EventsPayload,
  MinMaxSeries,
  ParamValues,
  SeriesPayload,
} from "./types.js";

interface RunData {
  series: SeriesPayload;
  events: EventsPayload;
  analyst: AnalystPayload;
}

export class App {
  private state: ViewState = { ...INITIAL_STATE };
  private antennas: AntennaInfo[] = [];
  private data: RunData | null = null;
  private form: ParamValues = { ...DEFAULT_PARAMS };
  private playing: number | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  async start(): Promise<void> {
    this.renderShell();
    try {
      const [antennas, defaults] = await Promise.all([
        this.api.antennas(),
        this.api.defaults(),
      ]);
      this.antennas = antennas.antennas;
      this.form = { ...defaults.params };
    } catch {
      /* defaults stay local */
    }
    window.addEventListener("hashchange", () => {
      void this.applyState(decodeHash(location.hash));
    });
    await this.applyState(decodeHash(location.hash));
    await this.refreshRunList();
    this.renderForm();
  }

  private async applyState(state: ViewState): Promise<void> {
    const changedRun = state.runId !== this.state.runId;
    this.state = state;
    if (changedRun) {
      this.data = null;
      if (state.runId) await this.loadRun(state.runId);
    }
    this.renderAll();
  }

  private setState(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    history.replaceState(null, "", encodeHash(this.state));
    this.renderAll();
  }

  private async loadRun(runId: string): Promise<void> {
    try {
      const info = await this.api.pollRun(runId);
      if (info.status !== "done") {
        this.note(`run ${runId} ${info.status}: ${info.error ?? ""}`);
        return;
      }
      const [series, events, analyst] = await Promise.all([
        this.api.timeseries(runId),
        this.api.events(runId),
        this.api.analystStats(runId),
      ]);
      this.data = { series, events, analyst };
      this.state.cursor = clampCursor(this.state.cursor, series.n_steps);
    } catch (err) {
      this.note(`failed to load run: ${String(err)}`);
    }
  }

  private el<T extends HTMLElement>(id: string): T {
    return this.root.querySelector(`#${id}`) as T;
  }

  private note(text: string): void {
    this.el("status").textContent = text;
  }

  private renderShell(): void {
    this.root.innerHTML = `
      <header>
        <h1>crowdlens</h1>
        <nav>
          <button id="tab-manager">City manager</button>
          <button id="tab-analyst">Analyst</button>
        </nav>
        <div id="status"></div>
      </header>
      <main>
        <section id="left">
          <div id="map"></div>
          <div id="replay">
            <button id="play">play</button>
            <input id="cursor" type="range" min="0" max="0" value="0"/>
            <span id="cursor-label"></span>
          </div>
        </section>
        <section id="right">
          <div id="runs"></div>
          <div id="charts"></div>
          <form id="params"></form>
          <div id="hints"></div>
        </section>
      </main>`;
    this.el("tab-manager").addEventListener("click", () => this.setState({ tab: "manager" }));
    this.el("tab-analyst").addEventListener("click", () => this.setState({ tab: "analyst" }));
    this.el("play").addEventListener("click", () => this.togglePlay());
    this.el<HTMLInputElement>("cursor").addEventListener("input", (ev) => {
      const value = parseInt((ev.target as HTMLInputElement).value, 10);
      this.setState({ cursor: value });
    });
  }

  private async refreshRunList(): Promise<void> {
    try {
      const { runs } = await this.api.listRuns();
      const box = this.el("runs");
      box.innerHTML = "<h3>runs</h3>";
      for (const run of runs) {
        const button = document.createElement("button");
        button.textContent = `${run.run_id} (${run.status})`;
        button.addEventListener("click", () => {
          location.hash = encodeHash({ ...this.state, runId: run.run_id, cursor: 0 });
        });
        box.appendChild(button);
      }
    } catch {
      /* server offline; leave the list empty */
    }
  }

  private togglePlay(): void {
    if (this.playing !== null) {
      clearInterval(this.playing);
      this.playing = null;
      this.el("play").textContent = "play";
      return;
    }
    this.el("play").textContent = "pause";
    this.playing = setInterval(() => {
      if (!this.data) return;
      const next = (this.state.cursor + 1) % this.data.series.n_steps;
      this.setState({ cursor: next });
    }, 400) as unknown as number;
  }

  private renderAll(): void {
    this.renderMap();
    this.renderCharts();
    this.renderHints();
    const cursorInput = this.el<HTMLInputElement>("cursor");
    if (this.data) {
      cursorInput.max = String(this.data.series.n_steps - 1);
      cursorInput.value = String(this.state.cursor);
      this.el("cursor-label").textContent = `t = ${this.state.cursor}`;
    }
  }

  private renderMap(): void {
    const box = this.el("map");
    if (!this.data) {
      box.innerHTML = `<p class="placeholder">select or submit a run</p>`;
      return;
    }
    const viewport = makeViewport(this.antennas);
    const positions = new Map<string, [number, number]>(
      this.antennas.map((a) => [a.antenna_id, [a.lon, a.lat] as [number, number]]),
    );
    const raster = nearestAntennaRaster(this.antennas, viewport, 24, 18);
    const cells: string[] = [];
    const rows = raster.length;
    const cols = rows ? raster[0].length : 0;
    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) {
        const shade = raster[r][c] % 2 ? "#f3f6f9" : "#e9eef3";
        cells.push(
          `<rect x="${(c / cols) * viewport.width}" y="${(r / rows) * viewport.height}" ` +
            `width="${viewport.width / cols}" height="${viewport.height / rows}" fill="${shade}"/>`,
        );
      }
    }
    const antennaDots = this.antennas
      .map((a) => {
        const [x, y] = viewport.project(a.lon, a.lat);
        return `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="2" fill="#888"><title>${a.antenna_id}</title></circle>`;
      })
      .join("");
    const layers = layersAt(this.data.events.events, this.state.cursor, viewport, positions)
      .map(
        (layer) =>
          `<path d="${layer.path}" class="layer-${layer.kind}" fill="${layer.color}" ` +
          `fill-opacity="0.25" stroke="${layer.color}"><title>${layer.popup}</title></path>`,
      )
      .join("");
    box.innerHTML =
      `<svg viewBox="0 0 ${viewport.width} ${viewport.height}">` +
      cells.join("") +
      antennaDots +
      layers +
      "</svg>";
  }

  private renderCharts(): void {
    const box = this.el("charts");
    if (!this.data) {
      box.innerHTML = "";
      return;
    }
    const { series } = this.data.series;
    const n = this.data.series.n_steps;
    if (this.state.tab === "manager") {
      const model = buildChart(managerChartLines(series), n);
      box.innerHTML =
        `<h3>clusters / crowds / unusual events per hour</h3>` +
        chartSvg(model, this.state.cursor);
      return;
    }
    const analyst = this.data.analyst;
    const groups: string[] = [];
    const group = (title: string, inner: string) =>
      `<details open><summary>${title}</summary>${inner}</details>`;
    groups.push(
      group(
        "Cumulative",
        chartSvg(
          buildChart(
            [
              { name: "clusters", values: analyst.cumulative.clusters, color: "#2e8540" },
              { name: "crowds", values: analyst.cumulative.crowds, color: "#205493" },
              { name: "unusual events", values: analyst.cumulative.unusual_events, color: "#cd2026" },
            ],
            n,
          ),
          this.state.cursor,
        ),
      ),
    );
    groups.push(
      group(
        "Detection per timestamp",
        chartSvg(
          buildChart(
            [
              { name: "clusters", values: analyst.detection.clusters, color: "#2e8540" },
              { name: "candidate crowds", values: analyst.detection.candidate_crowds, color: "#888" },
              { name: "crowds", values: analyst.detection.crowds, color: "#205493" },
              { name: "unusual events", values: analyst.detection.unusual_events, color: "#cd2026" },
            ],
            n,
          ),
          this.state.cursor,
        ),
      ),
    );
    const monitor = (title: string, mm: MinMaxSeries) =>
      group(
        title,
        chartSvg(
          buildChart(
            [
              { name: "max", values: mm.max, color: "#205493" },
              { name: "min", values: mm.min, color: "#2e8540", dashed: true },
            ],
            n,
            { threshold: mm.threshold },
          ),
          this.state.cursor,
        ),
      );
    groups.push(
      group(
        "Event monitoring",
        monitor("lifetime", analyst.event_monitoring.lifetime) +
          monitor("committed users", analyst.event_monitoring.committed_users) +
          monitor("total users", analyst.event_monitoring.total_users) +
          monitor("similarity", analyst.event_monitoring.similarity),
      ),
    );
    groups.push(
      group(
        "Cluster monitoring",
        chartSvg(
          buildChart(
            [{ name: "max cluster size", values: analyst.cluster_monitoring.cluster_size.max, color: "#205493" }],
            n,
            { threshold: analyst.cluster_monitoring.cluster_size.threshold },
          ),
          this.state.cursor,
        ) +
          chartSvg(
            buildChart(
              [{ name: "min spatial radius", values: analyst.cluster_monitoring.spatial_radius.min, color: "#2e8540" }],
              n,
            ),
            this.state.cursor,
          ),
      ),
    );
    box.innerHTML = groups.join("");
  }

  private renderForm(): void {
    const form = this.el<HTMLFormElement>("params");
    form.innerHTML = "<h3>parameters</h3>";
    for (const field of PARAM_FIELDS) {
      const row = document.createElement("label");
      row.textContent = field.label;
      const input = document.createElement("input");
      input.type = "number";
      input.step = String(field.step);
      input.value = String(this.form[field.key]);
      input.addEventListener("input", () => {
        this.form[field.key] = Number(input.value);
        this.updateFormValidity();
      });
      row.appendChild(input);
      form.appendChild(row);
    }
    const violations = document.createElement("p");
    violations.id = "violations";
    form.appendChild(violations);
    const submit = document.createElement("button");
    submit.id = "submit";
    submit.textContent = "run detection";
    submit.addEventListener("click", (ev) => {
      ev.preventDefault();
      void this.submit();
    });
    form.appendChild(submit);
    this.updateFormValidity();
  }

  private updateFormValidity(): void {
    const problems = validateParams(this.form);
    this.el("violations").textContent = problems.join("; ");
    this.el<HTMLButtonElement>("submit").disabled = problems.length > 0;
  }

  private async submit(): Promise<void> {
    try {
      const { run_id } = await this.api.createRun(toOverrides(this.form));
      this.note(`submitted ${run_id}`);
      await this.refreshRunList();
      const info = await this.api.pollRun(run_id);
      await this.refreshRunList();
      if (info.status === "done") {
        location.hash = encodeHash({ ...this.state, runId: run_id, cursor: 0 });
      } else {
        this.note(`run ${run_id} failed: ${info.error ?? ""}`);
      }
    } catch (err) {
      if (err instanceof ApiError) {
        this.el("violations").textContent = err.violations().join("; ");
      } else {
        this.note(String(err));
      }
    }
  }

  private renderHints(): void {
    const box = this.el("hints");
    if (!this.data || this.state.tab !== "analyst") {
      box.innerHTML = "";
      return;
    }
    const hints = thresholdHints(this.data.analyst);
    box.innerHTML =
      "<h3>parameter hints</h3>" +
      (hints.length
        ? hints.map((h) => `<p class="hint">${h.message}</p>`).join("")
        : "<p>all thresholds are active in this run</p>");
  }
}

export { clusterPopup };
