// Integration round trip against a real review service. Opt-in: set
// BLINKLAB_SERVER (e.g. http://127.0.0.1:8399) with the server running;
// otherwise this suite is skipped. Exercises the same store flow as the
// scripted tests but over the actual HTTP interface.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SessionStore } from "../src/state.js";

const SERVER = process.env.BLINKLAB_SERVER;

function syntheticCsv(): string {
  // flat 0.3 baseline with two clean dips per eye at 240 FPS
  const fps = 240;
  const n = fps * 30;
  const lines = ["frame,EAR_2D_left,EAR_2D_right"];
  const dip = (i: number, apex: number) =>
    0.25 * Math.exp(-0.5 * ((i - apex) / 8) ** 2);
  for (let i = 0; i < n; i++) {
    const left = 0.3 - dip(i, 5 * fps) - dip(i, 20 * fps);
    const right = 0.3 - dip(i, 5 * fps + 4) - dip(i, 20 * fps + 2);
    lines.push(`${i},${left.toFixed(6)},${right.toFixed(6)}`);
  }
  return lines.join("\n") + "\n";
}

describe.skipIf(!SERVER)("live server round trip", () => {
  it("upload -> detect -> edit -> stats equal a direct service call", async () => {
    const api = new ApiClient(`${SERVER}/api/v1`, (url, init) => fetch(url, init));
    const store = new SessionStore(api);

    await store.createSession(syntheticCsv(), 240);
    expect(store.session?.columns?.left).toBe("EAR_2D_left");

    await store.runDetection();
    expect(store.events.length).toBeGreaterThan(0);

    const victim = store.events.find((e) => e.state === "complete")!;
    const before = store.stats!;
    const ok = await store.setEventState(victim.id, "partial");
    expect(ok).toBe(true);

    const direct = (await api.getStats(store.sessionId)).stats;
    expect(store.stats).toEqual(direct);
    const eye = victim.eye;
    expect(direct[`Complete_Blink_Total_${eye}`]).toBe(
      before[`Complete_Blink_Total_${eye}`] - 1,
    );
    expect(direct[`Partial_Blink_Total_${eye}`]).toBe(
      before[`Partial_Blink_Total_${eye}`] + 1,
    );

    // row selection zooms to the blink window and the series endpoint
    // serves exactly that slice
    store.selectEvent(victim.id);
    const window = store.zoom.window!;
    expect(victim.apex_time_s).toBeGreaterThanOrEqual(window[0]);
    expect(victim.apex_time_s).toBeLessThanOrEqual(window[1]);
    const [start, end] = store.seriesRequestWindow();
    const slice = await api.getSeries(store.sessionId, start, end, 500);
    expect(slice.start_frame).toBe(start);
    expect(slice.left.time_s.length).toBeGreaterThan(0);
    expect(slice.left.time_s[0] * 240).toBeGreaterThanOrEqual(start - 1e-9);
  }, 30000);
});
