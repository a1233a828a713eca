import { describe, expect, it } from "vitest";
import { SessionStore } from "../src/store.js";
import type { EventRecord, MetricsRow, SessionView } from "../src/types.js";

function mkRow(t: number, v: Partial<MetricsRow> = {}): MetricsRow {
  return {
    t,
    backlog: 10 + t,
    processed: 5,
    mean_disagreement: 0.2,
    mean_load: 1.5,
    max_load: 4,
    rho_ai: 0.3,
    tau: 0.5,
    escalation_enabled: true,
    escalations: 0,
    accepted: 2,
    rejected: 1,
    revised: 1,
    concentration: 0.1,
    within_cluster_share: 0,
    intervention_active: false,
    mean_author_credit: 1.0,
    mean_reviewer_credit: 1.0,
    cumulative_impact: 3.0,
    objective_U: -12.5,
    ...v,
  };
}

function rows(from: number, to: number): MetricsRow[] {
  const out: MetricsRow[] = [];
  for (let t = from; t < to; t++) out.push(mkRow(t));
  return out;
}

function mkView(id: string, v: Partial<SessionView> = {}): SessionView {
  return {
    session_id: id,
    t: 0,
    horizon: 50,
    finished: false,
    status: "paused",
    config_hash: "abc",
    run_dir: `/tmp/${id}`,
    config: {},
    ...v,
  };
}

function mkEvent(seq: number, kind = "triage_summary"): EventRecord {
  return {
    seq,
    t: Math.floor(seq / 2),
    kind,
    payload: {},
    prev_hash: "p",
    hash: `h${seq}`,
  };
}

function events(from: number, to: number): EventRecord[] {
  const out: EventRecord[] = [];
  for (let s = from; s < to; s++) out.push(mkEvent(s));
  return out;
}

describe("SessionStore", () => {
  it("appends rows in order and reports how many were new", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    expect(store.ingestRows("s1", rows(0, 5))).toBe(5);
    expect(store.get("s1").nextT).toBe(5);
    expect(store.rows("s1").map((r) => r.t)).toEqual([0, 1, 2, 3, 4]);
  });

  it("tolerates overlapping fetches without duplicating rows", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    store.ingestRows("s1", rows(0, 5));
    // a stale since_t cursor re-serves rows 2..4 alongside the new ones
    expect(store.ingestRows("s1", rows(2, 8))).toBe(3);
    expect(store.rows("s1")).toHaveLength(8);
    expect(store.rows("s1").map((r) => r.t)).toEqual([0, 1, 2, 3, 4, 5, 6, 7]);
  });

  it("refuses a gap in the metrics stream", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    store.ingestRows("s1", rows(0, 3));
    expect(() => store.ingestRows("s1", rows(5, 6))).toThrow(/gap/);
    // the buffer is untouched by the failed ingest
    expect(store.rows("s1")).toHaveLength(3);
  });

  it("applies the same cursor rules to events", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    expect(store.ingestEvents("s1", events(0, 4))).toBe(4);
    expect(store.ingestEvents("s1", events(1, 6))).toBe(2);
    expect(store.get("s1").nextSeq).toBe(6);
    expect(() => store.ingestEvents("s1", events(9, 10))).toThrow(/gap/);
    expect(store.events("s1").map((e) => e.seq)).toEqual([0, 1, 2, 3, 4, 5]);
  });

  it("re-opening a session updates the view but keeps buffers", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    store.ingestRows("s1", rows(0, 4));
    const state = store.open(mkView("s1", { t: 4, status: "running" }));
    expect(state.view.t).toBe(4);
    expect(state.rows).toHaveLength(4);
    expect(state.nextT).toBe(4);
  });

  it("builds chart traces from buffered rows", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    store.ingestRows("s1", [mkRow(0, { backlog: 7 }), mkRow(1, { backlog: 9 })]);
    expect(store.trace("s1", "backlog")).toEqual([
      { t: 0, v: 7 },
      { t: 1, v: 9 },
    ]);
  });

  it("tracks the fork forest", () => {
    const store = new SessionStore();
    store.open(mkView("root1"));
    store.open(mkView("root2"));
    store.open(mkView("child", { forked_from: "root1" }));
    store.open(mkView("grandchild", { forked_from: "child" }));
    expect(store.children("root1")).toEqual(["child"]);
    expect(store.children("root2")).toEqual([]);
    expect(store.lineage("grandchild")).toEqual(["root1", "child", "grandchild"]);
    expect(store.lineage("root2")).toEqual(["root2"]);
  });

  it("records injected windows per session", () => {
    const store = new SessionStore();
    store.open(mkView("s1"));
    store.open(mkView("s2"));
    store.recordInjection("s1", {
      start: 4,
      end: 9,
      path: "noise_multiplier",
      value: 3.0,
    });
    expect(store.get("s1").injections).toHaveLength(1);
    expect(store.get("s2").injections).toHaveLength(0);
  });

  it("throws for unknown sessions", () => {
    const store = new SessionStore();
    expect(() => store.get("nope")).toThrow(/unknown session/);
    expect(store.has("nope")).toBe(false);
  });
});
