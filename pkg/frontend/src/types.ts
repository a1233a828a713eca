/** Payload shapes as served by the control service. */

export interface MetricsRow {
  t: number;
  backlog: number;
  processed: number;
  mean_disagreement: number;
  mean_load: number;
  max_load: number;
  rho_ai: number;
  tau: number;
  escalation_enabled: boolean;
  escalations: number;
  accepted: number;
  rejected: number;
  revised: number;
  concentration: number;
  within_cluster_share: number;
  intervention_active: boolean;
  mean_author_credit: number;
  mean_reviewer_credit: number;
  cumulative_impact: number;
  objective_U: number;
}

/** Columns that make sense as a line-chart trace. */
export type NumericMetric = Exclude<
  keyof MetricsRow,
  "escalation_enabled" | "intervention_active"
>;

export type SessionStatus = "paused" | "running" | "finished";

export interface SessionView {
  session_id: string;
  t: number;
  horizon: number;
  finished: boolean;
  status: SessionStatus;
  config_hash: string;
  run_dir: string;
  config: Record<string, unknown>;
  forked_from?: string;
}

export interface PolicyView {
  tau: number;
  rho_ai: number;
  escalation_enabled: boolean;
}

export interface AdvanceResponse {
  session_id: string;
  t: number;
  finished: boolean;
  snapshots: Record<string, number>[];
  policy: PolicyView;
}

export interface InjectedWindow {
  start: number;
  end: number;
  path: string;
  value: number | boolean;
}

export interface InjectResponse {
  session_id: string;
  t: number;
  window: InjectedWindow;
  event_seq: number;
}

export interface EventRecord {
  seq: number;
  t: number;
  kind: string;
  payload: Record<string, unknown>;
  prev_hash: string;
  hash: string;
}

export interface SummaryData {
  name: string;
  seed: number;
  horizon: number;
  t: number;
  config_hash: string;
  final_backlog: number;
  final_tau: number;
  final_rho_ai: number;
  final_escalation_enabled: boolean;
  total_escalations: number;
  max_escalations_per_step: number;
  accepted_total: number;
  rejected_total: number;
  revised_total: number;
  processed_total: number;
  arrivals_total: number;
  cumulative_impact: number;
  max_concentration: number;
  final_concentration: number;
  chain_head: string;
  chain_length: number;
  first_intervention_t?: number;
}

export interface CreateSessionRequest {
  scenario?: string;
  seed?: number;
  overrides?: Record<string, unknown>;
}
