import type { ParamValues } from "./types.js";

export const DEFAULT_PARAMS: ParamValues = {
  epsilon_n: 20,
  epsilon_lt: 4,
  epsilon_ci: 10,
  epsilon_p: 0.2,
  epsilon_si: 0.2,
  min_locations: 2,
  window_minutes: 30,
};

export interface FieldSpec {
  key: keyof ParamValues;
  label: string;
  step: number;
}

export const PARAM_FIELDS: FieldSpec[] = [
  { key: "epsilon_n", label: "scale ε_n (min users per cluster)", step: 1 },
  { key: "epsilon_lt", label: "lifetime ε_lt (min crowd hours)", step: 1 },
  { key: "epsilon_ci", label: "commitment ε_ci (min committed users)", step: 1 },
  { key: "epsilon_p", label: "commitment probability ε_p", step: 0.05 },
  { key: "epsilon_si", label: "similarity ε_si", step: 0.05 },
  { key: "min_locations", label: "min distinct locations", step: 1 },
  { key: "window_minutes", label: "half window (minutes)", step: 5 },
];

/**
 * Client-side mirror of the server's parameter validation: same rules,
 * same violation strings, so a blocked form shows exactly what the
 * service would have answered with a 422.
 */
export function validateParams(values: ParamValues): string[] {
  const problems: string[] = [];
  if (values.epsilon_n < 0) problems.push("scale below 0");
  if (values.epsilon_lt < 2) problems.push("lifetime below 2");
  if (values.epsilon_ci < 0) problems.push("commitment below 0");
  if (values.epsilon_ci > values.epsilon_n) problems.push("commitment exceeds scale");
  if (values.epsilon_p < 0 || values.epsilon_p > 1)
    problems.push("commitment probability outside [0, 1]");
  if (values.epsilon_si < 0 || values.epsilon_si > 1)
    problems.push("similarity outside [0, 1]");
  if (values.min_locations < 2) problems.push("min_locations below 2");
  if (values.window_minutes * 60 <= 0) problems.push("half window not positive");
  return problems;
}

/** Request body for POST /runs: only the values that differ from defaults. */
export function toOverrides(values: ParamValues): Partial<ParamValues> {
  const body: Partial<ParamValues> = {};
  for (const key of Object.keys(values) as (keyof ParamValues)[]) {
    if (values[key] !== DEFAULT_PARAMS[key]) body[key] = values[key];
  }
  return body;
}
