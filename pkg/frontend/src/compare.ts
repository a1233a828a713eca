import type { SummaryData } from "./types.js";

/** Canonical 6-significant-digit rendering (what the delta table shows). */
export function sig6(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  if (x === 0) return "0";
  return Number(x.toPrecision(6)).toString();
}

export interface ComparisonRow {
  metric: string;
  label: string;
  a: number;
  b: number;
  delta: number;
  display: string;
}

const COMPARED: Array<[keyof SummaryData, string]> = [
  ["final_backlog", "final backlog"],
  ["final_tau", "final triage threshold"],
  ["final_rho_ai", "final AI fraction"],
  ["total_escalations", "total escalations"],
  ["final_concentration", "final concentration"],
  ["max_concentration", "peak concentration"],
  ["cumulative_impact", "cumulative impact"],
];

/**
 * Pure arithmetic on two fetched summaries; the table never re-derives a
 * simulation quantity. Delta is b minus a.
 */
export function compareSummaries(a: SummaryData, b: SummaryData): ComparisonRow[] {
  return COMPARED.map(([metric, label]) => {
    const va = a[metric] as number;
    const vb = b[metric] as number;
    const delta = vb - va;
    return { metric, label, a: va, b: vb, delta, display: sig6(delta) };
  });
}

export function finalKappaDelta(a: SummaryData, b: SummaryData): number {
  return b.final_concentration - a.final_concentration;
}

/** Both sides expose the metric as a finite number (guards the UI button). */
export function comparable(a: SummaryData, b: SummaryData, metric: string): boolean {
  const va = (a as unknown as Record<string, unknown>)[metric];
  const vb = (b as unknown as Record<string, unknown>)[metric];
  return typeof va === "number" && Number.isFinite(va)
    && typeof vb === "number" && Number.isFinite(vb);
}
