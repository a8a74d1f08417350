// Entry point: wire the store and the four panel views together.
// The session id lives in the URL hash so a refresh re-attaches to the
// same server-side session and rebuilds the whole view from it.

import { ApiClient } from "./api.js";
import { ChartView } from "./chart.js";
import { ControlsView } from "./controls.js";
import { SessionStore } from "./state.js";
import { StatsView } from "./statsView.js";
import { TableView } from "./table.js";
import { toast } from "./toast.js";

function panel(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing panel #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const store = new SessionStore(new ApiClient("/api/v1"));
  new ControlsView(panel("controls"), store);
  new ChartView(panel("chart"), store);
  new TableView(panel("table"), store);
  new StatsView(panel("stats"), store);

  const status = panel("status");
  store.subscribe(() => {
    const s = store.session;
    status.textContent = s
      ? `session ${s.session_id.slice(0, 8)} · ${s.n_frames} frames @ ${s.fps} FPS` +
        (store.busy ? " · working…" : "")
      : "no session";
  });

  const hash = window.location.hash.replace(/^#/, "");
  if (hash) {
    try {
      await store.attachSession(hash);
    } catch {
      toast("stored session is gone; load a file to start a new one");
      window.location.hash = "";
    }
  }
}

void boot();
