// Pure mark construction for the EAR chart: colors, marker shapes, and
// which events fall inside the current window.

import type { BlinkEventRow, Eye } from "./model.js";
import type { Scale } from "./scale.js";

export const EYE_COLORS: Record<Eye, string> = {
  left: "#1f77b4",
  right: "#d62728",
};

export interface MarkerSpec {
  eventId: number;
  shape: "dot" | "triangle";
  color: string;
  x: number;
  y: number;
  selected: boolean;
}

export function markerShape(state: BlinkEventRow["state"]): "dot" | "triangle" | null {
  if (state === "complete") return "dot";
  if (state === "partial") return "triangle";
  return null; // state "none" draws no marker
}

export function buildMarkers(
  events: BlinkEventRow[],
  window: [number, number],
  sx: Scale,
  sy: Scale,
  selectedId: number | null,
): MarkerSpec[] {
  const out: MarkerSpec[] = [];
  for (const event of events) {
    const shape = markerShape(event.state);
    if (shape === null) continue;
    if (event.apex_time_s < window[0] || event.apex_time_s > window[1]) continue;
    out.push({
      eventId: event.id,
      shape,
      color: EYE_COLORS[event.eye],
      x: sx(event.apex_time_s),
      y: sy(event.apex_ear),
      selected: event.id === selectedId,
    });
  }
  return out;
}

export function trianglePath(x: number, y: number, r = 5): string {
  const top = (y - r).toFixed(2);
  const base = (y + r * 0.75).toFixed(2);
  return `M ${x.toFixed(2)} ${top} L ${(x - r * 0.9).toFixed(2)} ${base} L ${(x + r * 0.9).toFixed(2)} ${base} Z`;
}
