// Session state store. Holds everything the views render and funnels all
// mutations through the service: the UI never computes statistics or
// classifications itself, it only displays what the server returns.
// At most one state mutation is in flight per session; event edits apply
// optimistically and roll back when the PATCH fails.

import { ApiClient, ApiError } from "./api.js";
import type {
  BlinkEventRow,
  BlinkState,
  ParamsForm,
  SessionInfo,
  StatsPayload,
  SummaryBundle,
} from "./model.js";
import { frameWindow, zoomWindowForEvent } from "./scale.js";

export interface ZoomState {
  window: [number, number] | null; // seconds; null = full recording
}

export type Listener = () => void;

export class SessionStore {
  readonly api: ApiClient;
  session: SessionInfo | null = null;
  events: BlinkEventRow[] = [];
  stats: StatsPayload | null = null;
  summary: SummaryBundle | null = null;
  selectedEventId: number | null = null;
  zoom: ZoomState = { window: null };
  warnings: string[] = [];
  lastError: string | null = null;
  fieldErrors: Record<string, string> = {};
  busy = false;

  private listeners: Listener[] = [];
  private patchInFlight = false;

  constructor(api: ApiClient) {
    this.api = api;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.lastError = err.message;
      this.fieldErrors = err.fieldErrors;
    } else {
      this.lastError = String(err);
      this.fieldErrors = {};
    }
    this.emit();
  }

  get sessionId(): string {
    if (!this.session) throw new Error("no session loaded");
    return this.session.session_id;
  }

  async createSession(csv: string, fps: number): Promise<void> {
    this.busy = true;
    this.lastError = null;
    this.fieldErrors = {};
    this.emit();
    try {
      this.session = await this.api.createSession(csv, fps);
      this.events = [];
      this.stats = null;
      this.summary = null;
      this.selectedEventId = null;
      this.zoom = { window: null };
      this.warnings = this.session.warnings ?? [];
    } catch (err) {
      this.fail(err);
      throw err;
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  /** Re-attach to an existing session (refresh-safe: state is rebuilt). */
  async attachSession(sessionId: string): Promise<void> {
    this.session = await this.api.getSession(sessionId);
    if (this.session.detected) {
      await this.refreshAfterDetection();
    }
    this.emit();
  }

  async applyParams(params: ParamsForm): Promise<boolean> {
    this.lastError = null;
    this.fieldErrors = {};
    try {
      await this.api.putParams(this.sessionId, params);
      this.emit();
      return true;
    } catch (err) {
      this.fail(err);
      return false;
    }
  }

  async runDetection(): Promise<void> {
    this.busy = true;
    this.emit();
    try {
      const result = await this.api.detect(this.sessionId);
      this.warnings = result.warnings;
      await this.refreshAfterDetection();
      if (this.session) this.session.detected = true;
    } catch (err) {
      this.fail(err);
      throw err;
    } finally {
      this.busy = false;
      this.emit();
    }
  }

  private async refreshAfterDetection(): Promise<void> {
    const [events, stats, summary] = await Promise.all([
      this.api.listEvents(this.sessionId),
      this.api.getStats(this.sessionId),
      this.api.getSummary(this.sessionId),
    ]);
    this.events = events.events;
    this.stats = stats.stats;
    this.summary = summary.summary;
    this.selectedEventId = null;
    this.zoom = { window: null };
    this.emit();
  }

  /**
   * Optimistically set a blink state, PATCH it, and refresh statistics.
   * On failure the row reverts and lastError carries the toast message.
   */
  async setEventState(eventId: number, state: BlinkState): Promise<boolean> {
    if (this.patchInFlight) return false; // one mutation at a time
    const index = this.events.findIndex((e) => e.id === eventId);
    if (index < 0) return false;
    const previous = this.events[index];
    this.events = this.events.slice();
    this.events[index] = { ...previous, state, state_source: "manual" };
    this.patchInFlight = true;
    this.lastError = null;
    this.emit();
    try {
      const response = await this.api.patchEventState(this.sessionId, eventId, state);
      this.events = this.events.slice();
      this.events[index] = response.event;
      const stats = await this.api.getStats(this.sessionId);
      this.stats = stats.stats;
      this.emit();
      return true;
    } catch (err) {
      this.events = this.events.slice();
      this.events[index] = previous; // rollback
      this.fail(err);
      return false;
    } finally {
      this.patchInFlight = false;
      this.emit();
    }
  }

  /** Select a table row and zoom the chart to that blink's window. */
  selectEvent(eventId: number | null): void {
    this.selectedEventId = eventId;
    if (eventId === null || !this.session) {
      this.zoom = { window: null };
      this.emit();
      return;
    }
    const event = this.events.find((e) => e.id === eventId);
    if (!event) return;
    const durationS = this.session.n_frames / this.session.fps;
    this.zoom = { window: zoomWindowForEvent(event, this.session.fps, durationS) };
    this.emit();
  }

  resetZoom(): void {
    this.zoom = { window: null };
    this.selectedEventId = null;
    this.emit();
  }

  /** Frame range to request from the decimated series endpoint. */
  seriesRequestWindow(): [number, number] {
    if (!this.session) return [0, 1];
    if (!this.zoom.window) return [0, this.session.n_frames];
    return frameWindow(this.zoom.window, this.session.fps, this.session.n_frames);
  }
}
