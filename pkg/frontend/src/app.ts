import { ApiError, Client } from "./api.js";
import { drawChart, markersFromEvents, type Trace } from "./charts.js";
import { comparable, compareSummaries, sig6 } from "./compare.js";
import { SessionStore } from "./store.js";
import type { NumericMetric, SessionView, SummaryData } from "./types.js";

const POLL_MS = 500;
const TRACE_COLORS = ["#2563eb", "#d97706", "#059669", "#dc2626", "#7c3aed"];

const client = new Client(
  (window as unknown as { PUBLOOP_API?: string }).PUBLOOP_API
  ?? "http://127.0.0.1:8000",
);
const store = new SessionStore();

let activeId: string | null = null;
let compareA: string | null = null;
let compareB: string | null = null;
let compareMetric: NumericMetric = "backlog";
const summaries = new Map<string, SummaryData>();
// at most one in-flight mutating request per session
const mutationQueues = new Map<string, Promise<unknown>>();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function enqueue<T>(sessionId: string, action: () => Promise<T>): Promise<T> {
  const tail = mutationQueues.get(sessionId) ?? Promise.resolve();
  const next = tail.then(action, action);
  mutationQueues.set(sessionId, next.catch(() => undefined));
  return next;
}

function showError(message: string): void {
  const box = el<HTMLDivElement>("error-box");
  box.textContent = message;
  box.style.display = message ? "block" : "none";
}

async function refreshSession(id: string): Promise<void> {
  const state = store.get(id);
  const rows = await client.metrics(id, state.nextT);
  store.ingestRows(id, rows);
  const events = await client.events(id, state.nextSeq);
  store.ingestEvents(id, events);
  if (state.view.finished || rows.length > 0) {
    summaries.set(id, await client.summary(id));
  }
}

async function launch(): Promise<void> {
  showError("");
  const scenario = el<HTMLInputElement>("scenario").value.trim() || undefined;
  const seedRaw = el<HTMLInputElement>("seed").value.trim();
  const overrides: Record<string, unknown> = {};
  for (const line of el<HTMLTextAreaElement>("overrides").value.split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const eq = trimmed.indexOf("=");
    if (eq < 1) {
      showError(`override must look like key=value: ${trimmed}`);
      return;
    }
    const raw = trimmed.slice(eq + 1).trim();
    const num = Number(raw);
    overrides[trimmed.slice(0, eq).trim()] =
      raw === "true" ? true : raw === "false" ? false
      : Number.isFinite(num) && raw !== "" ? num : raw;
  }
  try {
    const view = await client.createSession({
      scenario,
      seed: seedRaw ? Number(seedRaw) : undefined,
      overrides,
    });
    store.open(view);
    activeId = view.session_id;
    renderAll();
  } catch (err) {
    showError(err instanceof ApiError ? err.detail : String(err));
  }
}

function steer(action: "advance" | "inject" | "fork", arg?: number): void {
  const id = activeId;
  if (!id) return;
  void enqueue(id, async () => {
    showError("");
    try {
      if (action === "advance") {
        const resp = await client.advance(id, arg ?? 1);
        store.get(id).view.t = resp.t;
        store.get(id).view.finished = resp.finished;
        store.get(id).view.status = resp.finished ? "finished" : "paused";
      } else if (action === "inject") {
        const resp = await client.inject(id, "noise_multiplier", arg ?? 3.0);
        store.recordInjection(id, resp.window);
      } else {
        const view = await client.fork(id);
        store.open(view);
      }
      await refreshSession(id);
    } catch (err) {
      showError(err instanceof ApiError ? err.detail : String(err));
    }
    renderAll();
  });
}

function traceFor(id: string, metric: NumericMetric, colorIdx: number): Trace {
  return {
    name: `${id}:${metric}`,
    points: store.trace(id, metric),
    color: TRACE_COLORS[colorIdx % TRACE_COLORS.length],
  };
}

function renderCharts(): void {
  if (!activeId || !store.has(activeId)) return;
  const markers = markersFromEvents(store.events(activeId));
  drawChart(el<HTMLCanvasElement>("chart-backlog"),
    [traceFor(activeId, "backlog", 0)], markers);
  drawChart(el<HTMLCanvasElement>("chart-policy"),
    [traceFor(activeId, "tau", 0), traceFor(activeId, "rho_ai", 1)], markers);
  drawChart(el<HTMLCanvasElement>("chart-disagreement"),
    [traceFor(activeId, "mean_disagreement", 2)], markers);
  drawChart(el<HTMLCanvasElement>("chart-concentration"),
    [traceFor(activeId, "concentration", 3)], markers);
}

function renderSessions(): void {
  const list = el<HTMLUListElement>("session-list");
  list.textContent = "";
  for (const id of store.ids()) {
    const s = store.get(id);
    const item = document.createElement("li");
    const branch = s.view.forked_from ? ` (fork of ${s.view.forked_from})` : "";
    item.textContent =
      `${id} ${s.view.status} t=${s.view.t}/${s.view.horizon}${branch}`;
    item.className = id === activeId ? "active" : "";
    item.onclick = () => {
      activeId = id;
      renderAll();
    };
    list.appendChild(item);
  }
  for (const sel of [el<HTMLSelectElement>("cmp-a"), el<HTMLSelectElement>("cmp-b")]) {
    const chosen = sel.value;
    sel.textContent = "";
    for (const id of store.ids()) {
      const opt = document.createElement("option");
      opt.value = id;
      opt.textContent = id;
      sel.appendChild(opt);
    }
    if (store.has(chosen)) sel.value = chosen;
  }
}

function renderFeed(): void {
  if (!activeId || !store.has(activeId)) return;
  const feed = el<HTMLUListElement>("event-feed");
  feed.textContent = "";
  const markers = markersFromEvents(store.events(activeId));
  for (const m of markers.slice(-30).reverse()) {
    const item = document.createElement("li");
    item.textContent = `t=${m.t} ${m.label}`;
    item.className = m.kind;
    feed.appendChild(item);
  }
}

function renderCompare(): void {
  const table = el<HTMLTableElement>("compare-table");
  table.textContent = "";
  const canvas = el<HTMLCanvasElement>("chart-compare");
  if (!compareA || !compareB) return;
  const a = summaries.get(compareA);
  const b = summaries.get(compareB);
  if (!a || !b || !comparable(a, b, compareMetric)) return;

  const header = table.insertRow();
  for (const text of ["metric", compareA, compareB, "delta"]) {
    const cell = document.createElement("th");
    cell.textContent = text;
    header.appendChild(cell);
  }
  for (const row of compareSummaries(a, b)) {
    const tr = table.insertRow();
    tr.insertCell().textContent = row.label;
    tr.insertCell().textContent = sig6(row.a);
    tr.insertCell().textContent = sig6(row.b);
    tr.insertCell().textContent = row.display;
  }

  const branchT = store.get(compareB).view.forked_from === compareA
    ? store.get(compareB).rows.length > 0 ? store.get(compareB).view.t : undefined
    : undefined;
  drawChart(canvas, [
    traceFor(compareA, compareMetric, 0),
    traceFor(compareB, compareMetric, 1),
  ], [], branchT);
}

function renderAll(): void {
  renderSessions();
  renderCharts();
  renderFeed();
  renderCompare();
}

async function poll(): Promise<void> {
  for (const id of store.ids()) {
    const state = store.get(id);
    if (state.view.finished && state.nextT >= state.view.horizon) continue;
    try {
      await refreshSession(id);
    } catch {
      // transient fetch failure; next tick retries
    }
  }
  renderAll();
}

export function mount(): void {
  el<HTMLButtonElement>("launch").onclick = () => void launch();
  el<HTMLButtonElement>("advance-1").onclick = () => steer("advance", 1);
  el<HTMLButtonElement>("advance-10").onclick = () => steer("advance", 10);
  el<HTMLButtonElement>("advance-100").onclick = () => steer("advance", 100);
  el<HTMLButtonElement>("inject-noise").onclick = () => steer("inject", 3.0);
  el<HTMLButtonElement>("fork").onclick = () => steer("fork");
  el<HTMLSelectElement>("cmp-a").onchange = (ev) => {
    compareA = (ev.target as HTMLSelectElement).value;
    renderCompare();
  };
  el<HTMLSelectElement>("cmp-b").onchange = (ev) => {
    compareB = (ev.target as HTMLSelectElement).value;
    renderCompare();
  };
  el<HTMLSelectElement>("cmp-metric").onchange = (ev) => {
    compareMetric = (ev.target as HTMLSelectElement).value as NumericMetric;
    renderCompare();
  };
  // reconstruct any live sessions after a refresh, purely from GETs
  void client.sessions().then(async (views: SessionView[]) => {
    for (const view of views) {
      store.open(view);
      await refreshSession(view.session_id);
    }
    if (!activeId && views.length > 0) activeId = views[0].session_id;
    renderAll();
  }).catch(() => undefined);
  window.setInterval(() => void poll(), POLL_MS);
}

if (typeof document !== "undefined" && document.getElementById("launch")) {
  mount();
}
