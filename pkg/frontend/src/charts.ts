import type { Point } from "./store.js";
import type { EventRecord } from "./types.js";

export const MAX_POINTS_PER_TRACE = 2000;

/**
 * Thin a trace for drawing. Buffers themselves are never thinned; this runs
 * at render time only. First and last points always survive so the visible
 * range and the latest value stay exact.
 */
export function decimate<T>(points: readonly T[], max = MAX_POINTS_PER_TRACE): T[] {
  if (max < 2) throw new Error("decimation budget must be >= 2");
  if (points.length <= max) return [...points];
  const out: T[] = [];
  const last = points.length - 1;
  const step = last / (max - 1);
  let prev = -1;
  for (let i = 0; i < max; i++) {
    const idx = i === max - 1 ? last : Math.round(i * step);
    if (idx !== prev) {
      out.push(points[idx]);
      prev = idx;
    }
  }
  return out;
}

export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): (x: number) => number {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (x) => r0 + ((x - d0) / span) * (r1 - r0);
}

export interface Marker {
  t: number;
  kind: string;
  label: string;
}

const MARKED_KINDS = new Set(["escalation", "policy_update", "intervention"]);

/** Events worth annotating on a chart, in seq order. */
export function markersFromEvents(events: readonly EventRecord[]): Marker[] {
  return events
    .filter((ev) => MARKED_KINDS.has(ev.kind))
    .map((ev) => {
      let label = ev.kind;
      if (ev.kind === "policy_update") {
        label = `${String(ev.payload.field)} -> ${String(ev.payload.new)}`;
      } else if (ev.kind === "escalation") {
        label = `escalated ${String(ev.payload.manuscript)}`;
      } else if (ev.kind === "intervention") {
        label = `intervention (kappa ${String(ev.payload.kappa)})`;
      }
      return { t: ev.t, kind: ev.kind, label };
    });
}

export interface Trace {
  name: string;
  points: readonly Point[];
  color: string;
}

const MARKER_COLORS: Record<string, string> = {
  escalation: "#d97706",
  policy_update: "#2563eb",
  intervention: "#dc2626",
};

/** Render traces plus markers onto a canvas; no-op off-screen or headless. */
export function drawChart(
  canvas: HTMLCanvasElement,
  traces: readonly Trace[],
  markers: readonly Marker[] = [],
  branchPointT?: number,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);

  const drawn = traces.map((tr) => ({ ...tr, points: decimate(tr.points) }));
  const all = drawn.flatMap((tr) => tr.points);
  if (all.length === 0) return;
  let tMax = 1;
  let vMin = Infinity;
  let vMax = -Infinity;
  for (const p of all) {
    if (p.t > tMax) tMax = p.t;
    if (p.v < vMin) vMin = p.v;
    if (p.v > vMax) vMax = p.v;
  }
  if (vMin === vMax) {
    vMin -= 1;
    vMax += 1;
  }
  const pad = 8;
  const sx = linearScale(0, tMax, pad, w - pad);
  const sy = linearScale(vMin, vMax, h - pad, pad);

  for (const m of markers) {
    ctx.strokeStyle = MARKER_COLORS[m.kind] ?? "#9ca3af";
    ctx.globalAlpha = 0.35;
    ctx.beginPath();
    ctx.moveTo(sx(m.t), pad);
    ctx.lineTo(sx(m.t), h - pad);
    ctx.stroke();
  }
  ctx.globalAlpha = 1;

  if (branchPointT !== undefined) {
    ctx.strokeStyle = "#111827";
    ctx.setLineDash([4, 3]);
    ctx.beginPath();
    ctx.moveTo(sx(branchPointT), pad);
    ctx.lineTo(sx(branchPointT), h - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  for (const tr of drawn) {
    ctx.strokeStyle = tr.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    tr.points.forEach((p, i) => {
      if (i === 0) ctx.moveTo(sx(p.t), sy(p.v));
      else ctx.lineTo(sx(p.t), sy(p.v));
    });
    ctx.stroke();
  }
}
