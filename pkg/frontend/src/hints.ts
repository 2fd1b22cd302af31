// Parameter-efficacy hints: a threshold line the current run never crosses
// suggests the knob is doing no work and could be loosened.

import type { AnalystPayload } from "./types.js";

export interface Hint {
  parameter: string;
  message: string;
}

function exceeds(values: (number | null)[], threshold: number): boolean {
  return values.some((v) => v !== null && v >= threshold);
}

function dipsBelow(values: (number | null)[], threshold: number): boolean {
  return values.some((v) => v !== null && v < threshold);
}

export function thresholdHints(stats: AnalystPayload): Hint[] {
  const hints: Hint[] = [];
  const em = stats.event_monitoring;
  const params = stats.params;

  if (!exceeds(em.committed_users.max, params.epsilon_ci)) {
    hints.push({
      parameter: "epsilon_ci",
      message: `ε_ci never reached: no candidate had ${params.epsilon_ci} committed users; consider lowering it`,
    });
  }
  if (!exceeds(em.lifetime.max, params.epsilon_lt)) {
    hints.push({
      parameter: "epsilon_lt",
      message: `ε_lt never reached: no candidate lasted ${params.epsilon_lt} hours; consider lowering it`,
    });
  }
  if (!dipsBelow(em.similarity.min, params.epsilon_si)) {
    hints.push({
      parameter: "epsilon_si",
      message: `ε_si never undercut: no crowd's similarity fell below ${params.epsilon_si}; consider raising it`,
    });
  }
  if (!exceeds(stats.cluster_monitoring.cluster_size.max, params.epsilon_n)) {
    hints.push({
      parameter: "epsilon_n",
      message: `ε_n never reached: no cluster had ${params.epsilon_n} users; consider lowering it`,
    });
  }
  return hints;
}
