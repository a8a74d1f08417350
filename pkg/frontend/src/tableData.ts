// Pure table logic: column definitions, stable sorting, value formatting.

import type { BlinkEventRow } from "./model.js";

export type SortKey =
  | "id"
  | "eye"
  | "apex_time_s"
  | "apex_ear"
  | "prominence"
  | "width_frames"
  | "height"
  | "state";

export interface SortOrder {
  key: SortKey;
  ascending: boolean;
}

export function sortEvents(events: BlinkEventRow[], order: SortOrder): BlinkEventRow[] {
  const indexed = events.map((event, i) => ({ event, i }));
  indexed.sort((a, b) => {
    const va = a.event[order.key];
    const vb = b.event[order.key];
    let cmp = va < vb ? -1 : va > vb ? 1 : 0;
    if (!order.ascending) cmp = -cmp;
    return cmp !== 0 ? cmp : a.i - b.i; // stable on ties
  });
  return indexed.map((x) => x.event);
}

export function toggleSort(current: SortOrder, key: SortKey): SortOrder {
  if (current.key === key) return { key, ascending: !current.ascending };
  return { key, ascending: true };
}

export function fmtNumber(value: number, digits = 4): string {
  if (!Number.isFinite(value)) return "";
  return value.toFixed(digits).replace(/\.?0+$/, "");
}

export function fmtMs(value: number | null): string {
  return value === null ? "—" : `${value.toFixed(1)} ms`;
}
