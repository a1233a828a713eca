import type {
  EventRecord,
  InjectedWindow,
  MetricsRow,
  NumericMetric,
  SessionView,
} from "./types.js";

export interface Point {
  t: number;
  v: number;
}

export interface SessionState {
  view: SessionView;
  rows: MetricsRow[];
  events: EventRecord[];
  injections: InjectedWindow[];
  /** next metrics row the session still needs (== rows.length) */
  nextT: number;
  /** next event seq the session still needs */
  nextSeq: number;
}

/**
 * Client-side session registry. Chart buffers are append-only: ingest
 * tolerates overlapping fetches (a `since_t` cursor re-serving known rows)
 * but never rewrites or drops what is already buffered, and refuses gaps so
 * a buffer always mirrors the service's rows 0..nextT-1 exactly.
 */
export class SessionStore {
  private readonly sessions = new Map<string, SessionState>();

  open(view: SessionView): SessionState {
    const existing = this.sessions.get(view.session_id);
    if (existing) {
      existing.view = view;
      return existing;
    }
    const state: SessionState = {
      view,
      rows: [],
      events: [],
      injections: [],
      nextT: 0,
      nextSeq: 0,
    };
    this.sessions.set(view.session_id, state);
    return state;
  }

  get(sessionId: string): SessionState {
    const state = this.sessions.get(sessionId);
    if (!state) throw new Error(`unknown session ${sessionId}`);
    return state;
  }

  has(sessionId: string): boolean {
    return this.sessions.has(sessionId);
  }

  ids(): string[] {
    return [...this.sessions.keys()];
  }

  updateView(view: SessionView): void {
    this.get(view.session_id).view = view;
  }

  /** Append new rows; returns how many were actually new. */
  ingestRows(sessionId: string, rows: readonly MetricsRow[]): number {
    const state = this.get(sessionId);
    let added = 0;
    for (const row of rows) {
      if (row.t < state.nextT) continue; // overlap from a stale cursor
      if (row.t > state.nextT) {
        throw new Error(
          `metrics gap for ${sessionId}: got t=${row.t}, expected ${state.nextT}`,
        );
      }
      state.rows.push(row);
      state.nextT += 1;
      added += 1;
    }
    return added;
  }

  ingestEvents(sessionId: string, events: readonly EventRecord[]): number {
    const state = this.get(sessionId);
    let added = 0;
    for (const ev of events) {
      if (ev.seq < state.nextSeq) continue;
      if (ev.seq > state.nextSeq) {
        throw new Error(
          `event gap for ${sessionId}: got seq=${ev.seq}, expected ${state.nextSeq}`,
        );
      }
      state.events.push(ev);
      state.nextSeq += 1;
      added += 1;
    }
    return added;
  }

  recordInjection(sessionId: string, window: InjectedWindow): void {
    this.get(sessionId).injections.push(window);
  }

  rows(sessionId: string): readonly MetricsRow[] {
    return this.get(sessionId).rows;
  }

  events(sessionId: string): readonly EventRecord[] {
    return this.get(sessionId).events;
  }

  trace(sessionId: string, metric: NumericMetric): Point[] {
    return this.get(sessionId).rows.map((r) => ({ t: r.t, v: r[metric] }));
  }

  /** Direct children in the fork forest. */
  children(sessionId: string): string[] {
    return [...this.sessions.values()]
      .filter((s) => s.view.forked_from === sessionId)
      .map((s) => s.view.session_id);
  }

  /** Branch path from a root session down to this one. */
  lineage(sessionId: string): string[] {
    const path = [sessionId];
    let cursor = this.get(sessionId).view.forked_from;
    while (cursor && this.sessions.has(cursor)) {
      path.unshift(cursor);
      cursor = this.get(cursor).view.forked_from;
    }
    return path;
  }
}
