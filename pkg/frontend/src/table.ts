// Blink table: one row per event with an editable state cell. Edits PATCH
// the service through the store (optimistic with rollback); clicking a row
// selects it and zooms the chart.

import type { BlinkEventRow, BlinkState } from "./model.js";
import { fmtNumber, SortOrder, sortEvents, toggleSort } from "./tableData.js";
import type { SessionStore } from "./state.js";
import { toast } from "./toast.js";

const COLUMNS: { key: SortOrder["key"]; label: string }[] = [
  { key: "id", label: "id" },
  { key: "eye", label: "eye" },
  { key: "apex_time_s", label: "apex [s]" },
  { key: "apex_ear", label: "apex EAR" },
  { key: "prominence", label: "prominence" },
  { key: "width_frames", label: "width [frames]" },
  { key: "height", label: "height" },
  { key: "state", label: "state" },
];

const STATES: BlinkState[] = ["none", "partial", "complete"];

export class TableView {
  private order: SortOrder = { key: "apex_time_s", ascending: true };

  constructor(
    private readonly container: HTMLElement,
    private readonly store: SessionStore,
  ) {
    store.subscribe(() => this.render());
    this.render();
  }

  private render(): void {
    const table = document.createElement("table");
    table.className = "blink-table";
    const head = table.createTHead().insertRow();
    for (const column of COLUMNS) {
      const th = document.createElement("th");
      th.textContent = column.label +
        (this.order.key === column.key ? (this.order.ascending ? " ▲" : " ▼") : "");
      th.addEventListener("click", () => {
        this.order = toggleSort(this.order, column.key);
        this.render();
      });
      head.appendChild(th);
    }

    const body = table.createTBody();
    for (const event of sortEvents(this.store.events, this.order)) {
      body.appendChild(this.row(event));
    }
    this.container.replaceChildren(table);
    if (!this.store.events.length) {
      const empty = document.createElement("p");
      empty.className = "placeholder";
      empty.textContent = this.store.session?.detected
        ? "No blinks detected."
        : "Run detection to populate the blink table.";
      this.container.appendChild(empty);
    }
  }

  private row(event: BlinkEventRow): HTMLTableRowElement {
    const tr = document.createElement("tr");
    tr.dataset.eventId = String(event.id);
    if (event.id === this.store.selectedEventId) tr.classList.add("selected");
    tr.addEventListener("click", () => this.store.selectEvent(event.id));

    const cells = [
      String(event.id),
      event.eye,
      fmtNumber(event.apex_time_s, 3),
      fmtNumber(event.apex_ear),
      fmtNumber(event.prominence),
      fmtNumber(event.width_frames, 2),
      fmtNumber(event.height),
    ];
    for (const text of cells) {
      const td = tr.insertCell();
      td.textContent = text;
    }

    const stateCell = tr.insertCell();
    const select = document.createElement("select");
    select.className = `state-select ${event.state}`;
    for (const state of STATES) {
      const option = document.createElement("option");
      option.value = state;
      option.textContent = state + (event.state_source === "manual" && state === event.state ? " *" : "");
      option.selected = state === event.state;
      select.appendChild(option);
    }
    select.addEventListener("click", (e) => e.stopPropagation());
    select.addEventListener("change", async () => {
      const ok = await this.store.setEventState(event.id, select.value as BlinkState);
      if (!ok) {
        toast(this.store.lastError ?? "state update failed");
      }
    });
    stateCell.appendChild(select);
    return tr;
  }
}
