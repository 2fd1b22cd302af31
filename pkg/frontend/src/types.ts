// Mirrors of the server's JSON payloads.

export interface ParamValues {
  epsilon_n: number;
  epsilon_lt: number;
  epsilon_ci: number;
  epsilon_p: number;
  epsilon_si: number;
  min_locations: number;
  window_minutes: number;
}

export interface RunInfo {
  run_id: string;
  status: "queued" | "running" | "done" | "failed";
  params: ParamValues;
  error?: string | null;
}

export interface SeriesPayload {
  origin_epoch: number;
  step: number;
  n_steps: number;
  series: {
    clusters: number[];
    candidate_crowds: number[];
    crowds: number[];
    unusual_crowds: number[];
    unusual_events: number[];
    active_users: number[];
    total_calls: number[];
  };
}

export interface CrowdDump {
  start: number;
  end: number;
  chain: { t: number; antenna_id: string; observed: string[] }[];
  committed: string[];
  lifetime: number;
  distinct_antennas: number;
}

export interface EventCluster {
  t: number;
  antenna_id: string;
  n_users: number;
  area_km2: number;
  density: number | null;
  pois: string[];
}

export interface EventPayload {
  event_id: string;
  start: number;
  end: number;
  n_crowds: number;
  participants: string[];
  hull: [number, number][];
  crowds: CrowdDump[];
  clusters: EventCluster[];
}

export interface EventsPayload {
  origin_epoch: number;
  step: number;
  n_steps: number;
  events: EventPayload[];
}

export interface MinMaxSeries {
  min: (number | null)[];
  max: (number | null)[];
  threshold: number | null;
}

export interface AnalystPayload {
  params: ParamValues;
  cumulative: { clusters: number[]; crowds: number[]; unusual_events: number[] };
  detection: {
    clusters: number[];
    candidate_crowds: number[];
    crowds: number[];
    unusual_events: number[];
  };
  event_monitoring: {
    lifetime: MinMaxSeries;
    committed_users: MinMaxSeries;
    total_users: MinMaxSeries;
    similarity: MinMaxSeries;
  };
  cluster_monitoring: {
    cluster_size: { max: number[]; threshold: number };
    spatial_radius: { min: number[]; threshold: number | null };
  };
}

export interface AntennaInfo {
  antenna_id: string;
  lon: number;
  lat: number;
}
