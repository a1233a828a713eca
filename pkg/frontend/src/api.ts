import type {
  AdvanceResponse,
  CreateSessionRequest,
  EventRecord,
  InjectResponse,
  MetricsRow,
  SessionView,
  SummaryData,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed wrapper over the control service. Every number displayed by
 * the UI comes out of this client; nothing is computed client-side beyond
 * delta arithmetic on fetched summaries.
 */
export class Client {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.base}${path}`, init);
    const text = await resp.text();
    if (!resp.ok) {
      let detail = text;
      try {
        detail = String((JSON.parse(text) as { detail?: string }).detail ?? text);
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(resp.status, detail);
    }
    return JSON.parse(text) as T;
  }

  createSession(body: CreateSessionRequest): Promise<SessionView> {
    return this.request("POST", "/sessions", body);
  }

  advance(sessionId: string, steps: number): Promise<AdvanceResponse> {
    return this.request("POST", `/sessions/${sessionId}/advance`, { steps });
  }

  inject(
    sessionId: string,
    path: string,
    value: number | boolean,
    duration?: number,
  ): Promise<InjectResponse> {
    const body: Record<string, unknown> = { path, value };
    if (duration !== undefined) body.duration = duration;
    return this.request("POST", `/sessions/${sessionId}/inject`, body);
  }

  fork(sessionId: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/fork`);
  }

  async metrics(sessionId: string, sinceT = 0): Promise<MetricsRow[]> {
    const data = await this.request<{ rows: MetricsRow[] }>(
      "GET",
      `/sessions/${sessionId}/metrics?since_t=${sinceT}`,
    );
    return data.rows;
  }

  async events(sessionId: string, sinceSeq = 0): Promise<EventRecord[]> {
    const data = await this.request<{ events: EventRecord[] }>(
      "GET",
      `/sessions/${sessionId}/events?since_seq=${sinceSeq}`,
    );
    return data.events;
  }

  summary(sessionId: string): Promise<SummaryData> {
    return this.request("GET", `/sessions/${sessionId}/summary`);
  }

  async sessions(): Promise<SessionView[]> {
    const data = await this.request<{ sessions: SessionView[] }>("GET", "/sessions");
    return data.sessions;
  }
}
