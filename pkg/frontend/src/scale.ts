// Pure chart geometry: linear scales, tick positions, and the zoom window
// computed for a selected blink. Kept DOM-free so it is unit-testable.

import type { BlinkEventRow } from "./model.js";

export interface Scale {
  (value: number): number;
  invert(pixel: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.invert = (pixel: number) => d0 + ((pixel - r0) / (r1 - r0 || 1)) * span;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / count;
  const magnitude = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * magnitude).find((s) => s >= raw)!;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Number(t.toFixed(12)));
  }
  return ticks;
}

/**
 * Time window (seconds) the chart zooms to when a blink row is selected:
 * the blink's onset..offset span padded by `padS` on both sides, clamped
 * to the recording. The window always contains the apex.
 */
export function zoomWindowForEvent(
  event: Pick<BlinkEventRow, "onset_frame" | "offset_frame" | "apex_frame">,
  fps: number,
  durationS: number,
  padS = 1.0,
): [number, number] {
  const onset = event.onset_frame / fps;
  const offset = event.offset_frame / fps;
  let lo = Math.max(0, onset - padS);
  let hi = Math.min(durationS, offset + padS);
  if (hi <= lo) {
    // degenerate span: center a 2*padS window on the apex instead
    const apex = event.apex_frame / fps;
    lo = Math.max(0, apex - padS);
    hi = Math.min(durationS, apex + padS);
  }
  return [lo, hi];
}

/** Frame range corresponding to a time window, for the series endpoint. */
export function frameWindow(
  window: [number, number],
  fps: number,
  nFrames: number,
): [number, number] {
  const start = Math.max(0, Math.floor(window[0] * fps));
  const end = Math.min(nFrames, Math.ceil(window[1] * fps) + 1);
  return [start, Math.max(end, start + 1)];
}

export function polylinePoints(
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
      parts.push(`${sx(xs[i]).toFixed(2)},${sy(ys[i]).toFixed(2)}`);
    }
  }
  return parts.join(" ");
}
