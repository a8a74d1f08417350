// Wire types for the review service (/api/v1). Field names mirror the
// server exactly; the UI never derives or recomputes any of these values.

export type Eye = "left" | "right";
export type BlinkState = "none" | "partial" | "complete";

export interface BlinkEventRow {
  id: number;
  eye: Eye;
  apex_frame: number;
  apex_time_s: number;
  apex_ear: number;
  prominence: number;
  width_frames: number;
  height: number;
  onset_frame: number;
  offset_frame: number;
  state: BlinkState;
  state_source: "auto" | "manual";
}

export interface ColumnPair {
  left: string;
  right: string;
}

export interface SessionInfo {
  session_id: string;
  version: number;
  fps: number;
  n_frames: number;
  headers: string[];
  auto_columns: ColumnPair | null;
  columns: ColumnPair | null;
  detected: boolean;
  warnings: string[];
}

export interface DetectResponse {
  version: number;
  n_left: number;
  n_right: number;
  n_matches: number;
  threshold_left: number | null;
  threshold_right: number | null;
  warnings: string[];
}

export interface EventsPage {
  version: number;
  total: number;
  page: number;
  page_size: number;
  events: BlinkEventRow[];
}

export interface MatchRow {
  left_id: number | null;
  right_id: number | null;
  delay_ms: number | null;
}

export interface SeriesTrace {
  time_s: number[];
  value: number[];
}

export interface SeriesWindow {
  version: number;
  start_frame: number;
  end_frame: number;
  stride: number;
  left: SeriesTrace;
  right: SeriesTrace;
}

export interface SummaryBundle {
  scatter: Record<Eye, SeriesTrace>;
  rolling_mean: Record<Eye, SeriesTrace>;
  rolling_std: Record<Eye, SeriesTrace>;
  markers: { time_s: number; apex_ear: number; state: BlinkState; eye: Eye }[];
  blinks_per_minute: number[];
  delay_histogram: { bin_edges_ms: number[]; counts: number[] };
  fps: number;
  duration_s: number;
}

export type StatsPayload = Record<string, number>;

export interface PeakParamsForm {
  min_prominence?: number;
  min_distance?: number;
  min_width?: number;
  max_width?: number | null;
  rel_height?: number;
}

export interface ParamsForm {
  left_column?: string;
  right_column?: string;
  peak?: PeakParamsForm;
  smoothing_window?: number | null;
  threshold_mode?: "auto" | "manual";
  manual_threshold_left?: number | null;
  manual_threshold_right?: number | null;
  max_match_delay_ms?: number;
}

export interface FieldErrors {
  detail: string;
  errors?: Record<string, string>;
}
