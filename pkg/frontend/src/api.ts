// Thin typed client for the review service. fetch is injectable so tests
// can run against a scripted service without a browser or network.

import type {
  BlinkState,
  DetectResponse,
  EventsPage,
  FieldErrors,
  MatchRow,
  ParamsForm,
  SeriesWindow,
  SessionInfo,
  StatsPayload,
  SummaryBundle,
} from "./model.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly fieldErrors: Record<string, string>;

  constructor(status: number, detail: string, fieldErrors?: Record<string, string>) {
    super(detail);
    this.status = status;
    this.fieldErrors = fieldErrors ?? {};
  }
}

async function asError(response: Response): Promise<ApiError> {
  let detail = `HTTP ${response.status}`;
  let fields: Record<string, string> | undefined;
  try {
    const body = (await response.json()) as FieldErrors;
    if (body.detail) detail = body.detail;
    fields = body.errors;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, detail, fields);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "/api/v1", fetchImpl: FetchLike = (u, i) => fetch(u, i)) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) throw await asError(response);
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  createSession(csv: string, fps: number, columns?: { left: string; right: string }) {
    return this.request<SessionInfo>("POST", "/sessions", {
      csv,
      fps,
      left_column: columns?.left,
      right_column: columns?.right,
    });
  }

  getSession(id: string) {
    return this.request<SessionInfo>("GET", `/sessions/${id}`);
  }

  getColumns(id: string) {
    return this.request<{
      headers: string[];
      auto: { left: string; right: string } | null;
      selected: { left: string; right: string } | null;
    }>("GET", `/sessions/${id}/columns`);
  }

  putParams(id: string, params: ParamsForm) {
    return this.request<{ version: number }>("PUT", `/sessions/${id}/params`, params);
  }

  detect(id: string) {
    return this.request<DetectResponse>("POST", `/sessions/${id}/detect`);
  }

  listEvents(id: string, page = 1, pageSize = 1000) {
    return this.request<EventsPage>(
      "GET",
      `/sessions/${id}/events?page=${page}&page_size=${pageSize}`,
    );
  }

  patchEventState(id: string, eventId: number, state: BlinkState) {
    return this.request<{ version: number; event: EventsPage["events"][number] }>(
      "PATCH",
      `/sessions/${id}/events/${eventId}`,
      { state },
    );
  }

  getMatches(id: string) {
    return this.request<{ version: number; matches: MatchRow[] }>(
      "GET",
      `/sessions/${id}/matches`,
    );
  }

  getStats(id: string) {
    return this.request<{ version: number; stats: StatsPayload }>(
      "GET",
      `/sessions/${id}/stats`,
    );
  }

  getSummary(id: string) {
    return this.request<{ version: number; summary: SummaryBundle }>(
      "GET",
      `/sessions/${id}/summary`,
    );
  }

  getSeries(id: string, startFrame: number, endFrame: number, maxPoints = 2000) {
    return this.request<SeriesWindow>(
      "GET",
      `/sessions/${id}/series?start_frame=${startFrame}&end_frame=${endFrame}&max_points=${maxPoints}`,
    );
  }
}
