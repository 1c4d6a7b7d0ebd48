// Explorer session state: the current query, its results, and a history
// stack that lets the user walk back out of a chain of pivots.
//
// State values are immutable; every transition returns a fresh object.
// Result sets keep the raw response text alongside the parsed hits so
// going back restores exactly what was shown before, byte for byte.

import {
  ExplorerClient,
  LabelMode,
  NetworkError,
  NotFoundError,
  RankedHit,
  RetrieveResponse,
  ServiceError,
} from "./api.js";

export type Query =
  | { kind: "person"; personId: string }
  | { kind: "pose"; keypoints: number[] };

export interface ResultSet {
  raw: string;
  hits: RankedHit[];
}

interface HistoryFrame {
  query: Query;
  results: ResultSet;
}

export interface ExplorerState {
  currentQuery: Query | null;
  k: number;
  mode: LabelMode;
  results: ResultSet | null;
  history: readonly HistoryFrame[];
  error: string | null;
}

export function initialState(k = 5, mode: LabelMode = "character"): ExplorerState {
  return { currentQuery: null, k, mode, results: null, history: [], error: null };
}

export function sameQuery(a: Query | null, b: Query | null): boolean {
  if (a === null || b === null) return a === b;
  if (a.kind === "person" && b.kind === "person") return a.personId === b.personId;
  if (a.kind === "pose" && b.kind === "pose") {
    return a.keypoints.length === b.keypoints.length &&
      a.keypoints.every((v, i) => v === b.keypoints[i]);
  }
  return false;
}

/** Fold a successful service response into the state.
 *
 * The query that was active gets pushed onto the history, except when
 * the new query is the same one again (a refresh must not let the user
 * "go back" to where they already are).
 */
export function applyResult(state: ExplorerState, query: Query, response: RetrieveResponse): ExplorerState {
  let history = state.history;
  if (state.currentQuery !== null && state.results !== null && !sameQuery(state.currentQuery, query)) {
    history = [...history, { query: state.currentQuery, results: state.results }];
  }
  return {
    ...state,
    currentQuery: query,
    results: { raw: response.raw, hits: response.payload.results },
    history,
    error: null,
  };
}

/** Record a failure without disturbing the query, results, or history. */
export function applyError(state: ExplorerState, message: string): ExplorerState {
  return { ...state, error: message };
}

export function canGoBack(state: ExplorerState): boolean {
  return state.history.length > 0;
}

/** Pop the most recent frame, restoring its query and result bytes. */
export function goBack(state: ExplorerState): ExplorerState {
  const frame = state.history[state.history.length - 1];
  if (frame === undefined) return state;
  return {
    ...state,
    currentQuery: frame.query,
    results: frame.results,
    history: state.history.slice(0, -1),
    error: null,
  };
}

function describe(err: unknown): string {
  if (err instanceof NetworkError) return err.message;
  if (err instanceof NotFoundError) return `not found: ${err.message}`;
  if (err instanceof ServiceError) return err.message;
  return err instanceof Error ? err.message : String(err);
}

/** Fetch results for a query and fold them in; on failure the previous
 * state survives with an inline error message. */
export async function submitQuery(
  state: ExplorerState,
  query: Query,
  client: ExplorerClient,
): Promise<ExplorerState> {
  try {
    const response = query.kind === "person"
      ? await client.retrieveByPerson(query.personId, state.k, state.mode)
      : await client.retrieveByPose(query.keypoints, state.k, state.mode);
    return applyResult(state, query, response);
  } catch (err) {
    return applyError(state, describe(err));
  }
}

/** Turn a result card into the next query. */
export function pivotQuery(hit: RankedHit): Query {
  return { kind: "person", personId: hit.person_id };
}

/** Serializes submissions: only the newest one may touch the state.
 *
 * The DOM shell calls run() on every user action; responses that were
 * superseded while in flight resolve to null and must be discarded.
 */
export class QuerySequencer {
  private ticket = 0;

  async run(task: () => Promise<ExplorerState>): Promise<ExplorerState | null> {
    const mine = ++this.ticket;
    const next = await task();
    return mine === this.ticket ? next : null;
  }
}
