import type {
  AnalystPayload,
  AntennaInfo,
  EventsPayload,
  ParamValues,
  RunInfo,
  SeriesPayload,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
  }

  violations(): string[] {
    if (Array.isArray(this.detail)) return this.detail.map(String);
    return [String(this.detail)];
  }
}

/** Thin JSON client over the service routes; the server is the source of truth. */
export class ApiClient {
  constructor(
    private base = "",
    private fetcher: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetcher(this.base + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, (body as { detail?: unknown }).detail ?? body);
    }
    return body as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  antennas(): Promise<{ antennas: AntennaInfo[] }> {
    return this.request("/antennas");
  }

  defaults(): Promise<{ params: ParamValues }> {
    return this.request("/params");
  }

  listRuns(): Promise<{ runs: RunInfo[] }> {
    return this.request("/runs");
  }

  runInfo(runId: string): Promise<RunInfo> {
    return this.request(`/runs/${encodeURIComponent(runId)}`);
  }

  createRun(overrides: Partial<ParamValues>): Promise<{ run_id: string; status: string }> {
    return this.request("/runs", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(overrides),
    });
  }

  timeseries(runId: string): Promise<SeriesPayload> {
    return this.request(`/runs/${encodeURIComponent(runId)}/timeseries`);
  }

  events(runId: string): Promise<EventsPayload> {
    return this.request(`/runs/${encodeURIComponent(runId)}/events`);
  }

  analystStats(runId: string): Promise<AnalystPayload> {
    return this.request(`/runs/${encodeURIComponent(runId)}/stats/analyst`);
  }

  /** Poll a run until it leaves the queue; at most one in-flight poll. */
  async pollRun(
    runId: string,
    intervalMs = 500,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
  ): Promise<RunInfo> {
    for (;;) {
      const info = await this.runInfo(runId);
      if (info.status === "done" || info.status === "failed") return info;
      await sleep(intervalMs);
    }
  }
}
