export type ActorTab = "manager" | "analyst";

export interface ViewState {
  runId: string | null;
  cursor: number;
  tab: ActorTab;
}

export const INITIAL_STATE: ViewState = { runId: null, cursor: 0, tab: "manager" };

/** URL scheme: #/run/{id}/t/{cursor}/{tab} — a reload reconstructs the view. */
export function encodeHash(state: ViewState): string {
  if (!state.runId) return "#/";
  return `#/run/${encodeURIComponent(state.runId)}/t/${state.cursor}/${state.tab}`;
}

export function decodeHash(hash: string): ViewState {
  const m = /^#\/run\/([^/]+)\/t\/(\d+)\/(manager|analyst)$/.exec(hash);
  if (!m) return { ...INITIAL_STATE };
  return {
    runId: decodeURIComponent(m[1]),
    cursor: parseInt(m[2], 10),
    tab: m[3] as ActorTab,
  };
}

export function clampCursor(cursor: number, nSteps: number): number {
  if (!Number.isFinite(cursor) || cursor < 0) return 0;
  if (cursor >= nSteps) return Math.max(0, nSteps - 1);
  return Math.floor(cursor);
}
