// Statistics tabs. Every number comes straight from the service's stats
// payload; the UI only groups and formats rows.

import type { StatsPayload } from "./model.js";
import type { SessionStore } from "./state.js";

const TABS: { name: string; match: (key: string) => boolean }[] = [
  { name: "EAR", match: (k) => k.startsWith("EAR_") || k.startsWith("Partial_Blink_threshold") },
  {
    name: "Blinks",
    match: (k) =>
      k.startsWith("Prominence_") || k.startsWith("Width_") || k.startsWith("Height_") ||
      k.startsWith("Blink_Length_"),
  },
  {
    name: "Totals",
    match: (k) => /_(Total|Frequency)_/.test(k),
  },
  { name: "Per minute", match: (k) => /_min\d+_/.test(k) },
];

export class StatsView {
  private active = 0;

  constructor(
    private readonly container: HTMLElement,
    private readonly store: SessionStore,
  ) {
    store.subscribe(() => this.render());
    this.render();
  }

  private render(): void {
    const stats = this.store.stats;
    this.container.replaceChildren();
    if (!stats) {
      const placeholder = document.createElement("p");
      placeholder.className = "placeholder";
      placeholder.textContent = "Statistics appear after detection.";
      this.container.appendChild(placeholder);
      return;
    }

    const nav = document.createElement("nav");
    nav.className = "tabs";
    TABS.forEach((tab, i) => {
      const button = document.createElement("button");
      button.type = "button";
      button.textContent = tab.name;
      if (i === this.active) button.classList.add("active");
      button.addEventListener("click", () => {
        this.active = i;
        this.render();
      });
      nav.appendChild(button);
    });
    this.container.appendChild(nav);
    this.container.appendChild(this.tabTable(stats, TABS[this.active].match));
  }

  private tabTable(stats: StatsPayload, match: (key: string) => boolean): HTMLElement {
    const table = document.createElement("table");
    table.className = "stats-table";
    const body = table.createTBody();
    for (const [key, value] of Object.entries(stats)) {
      if (!match(key)) continue;
      const row = body.insertRow();
      row.insertCell().textContent = key;
      const cell = row.insertCell();
      cell.className = "value";
      cell.dataset.stat = key;
      cell.textContent = Number.isInteger(value) ? String(value) : value.toFixed(6);
    }
    return table;
  }
}
