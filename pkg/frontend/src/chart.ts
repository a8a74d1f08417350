// EAR chart rendered as SVG. Left eye blue, right red; complete blinks as
// dots, partial as triangles. The series drawn is always fetched from the
// decimated series endpoint for the current window.

import { buildMarkers, EYE_COLORS, trianglePath } from "./chartData.js";
import type { SeriesWindow } from "./model.js";
import { linearScale, niceTicks, polylinePoints } from "./scale.js";
import type { SessionStore } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 960;
const HEIGHT = 360;
const MARGIN = { left: 54, right: 16, top: 16, bottom: 36 };

function el(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

export class ChartView {
  private readonly root: SVGSVGElement;
  private series: SeriesWindow | null = null;
  private pendingToken = 0;

  constructor(
    private readonly container: HTMLElement,
    private readonly store: SessionStore,
  ) {
    this.root = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.root.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    this.root.classList.add("ear-chart");
    container.appendChild(this.root);
    store.subscribe(() => void this.refresh());
  }

  /** Fetch the decimated series for the current window, then draw. */
  async refresh(): Promise<void> {
    if (!this.store.session) {
      this.root.replaceChildren();
      return;
    }
    const [start, end] = this.store.seriesRequestWindow();
    const token = ++this.pendingToken;
    try {
      const series = await this.store.api.getSeries(
        this.store.sessionId, start, end, 2000,
      );
      if (token !== this.pendingToken) return; // superseded by a newer window
      this.series = series;
      this.draw();
    } catch {
      // leave the previous drawing in place; errors surface via the store
    }
  }

  private draw(): void {
    const session = this.store.session;
    if (!session || !this.series) return;
    const windowS: [number, number] = this.store.zoom.window ?? [
      0,
      session.n_frames / session.fps,
    ];

    const values = [...this.series.left.value, ...this.series.right.value].filter(
      Number.isFinite,
    );
    const vmax = Math.max(0.5, ...values) * 1.05;
    const sx = linearScale(windowS, [MARGIN.left, WIDTH - MARGIN.right]);
    const sy = linearScale([0, vmax], [HEIGHT - MARGIN.bottom, MARGIN.top]);

    const g: SVGElement[] = [];
    g.push(el("rect", {
      x: MARGIN.left, y: MARGIN.top,
      width: WIDTH - MARGIN.left - MARGIN.right,
      height: HEIGHT - MARGIN.top - MARGIN.bottom,
      fill: "none", stroke: "#999", "stroke-width": 1,
    }));
    for (const t of niceTicks(windowS[0], windowS[1])) {
      const x = sx(t);
      g.push(el("line", { x1: x, y1: HEIGHT - MARGIN.bottom, x2: x, y2: HEIGHT - MARGIN.bottom + 4, stroke: "#999" }));
      const label = el("text", { x, y: HEIGHT - MARGIN.bottom + 16, "text-anchor": "middle", class: "tick" });
      label.textContent = `${t}s`;
      g.push(label);
    }
    for (const t of niceTicks(0, vmax, 5)) {
      const y = sy(t);
      g.push(el("line", { x1: MARGIN.left - 4, y1: y, x2: MARGIN.left, y2: y, stroke: "#999" }));
      const label = el("text", { x: MARGIN.left - 8, y: y + 3, "text-anchor": "end", class: "tick" });
      label.textContent = t.toFixed(2);
      g.push(label);
    }

    for (const eye of ["left", "right"] as const) {
      const trace = this.series[eye];
      const points = polylinePoints(trace.time_s, trace.value, sx, sy);
      if (points) {
        g.push(el("polyline", {
          points, fill: "none", stroke: EYE_COLORS[eye],
          "stroke-width": 1.1, class: `series ${eye}`,
        }));
      }
    }

    const markers = buildMarkers(
      this.store.events, windowS, sx, sy, this.store.selectedEventId,
    );
    for (const marker of markers) {
      const common = {
        fill: marker.color,
        class: `marker${marker.selected ? " selected" : ""}`,
        "data-event-id": marker.eventId,
      };
      const node = marker.shape === "dot"
        ? el("circle", { ...common, cx: marker.x, cy: marker.y, r: marker.selected ? 6 : 4 })
        : el("path", { ...common, d: trianglePath(marker.x, marker.y, marker.selected ? 7 : 5) });
      node.addEventListener("click", () => this.store.selectEvent(marker.eventId));
      g.push(node);
    }

    this.root.replaceChildren(...g);
  }
}
