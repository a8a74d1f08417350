// Parameter panel: file upload, fps, column selection (pre-filled from the
// server's auto-selection), detection thresholds, and the run button.
// Validation problems returned by the service (400 field errors) render
// inline next to the offending input.

import type { ParamsForm } from "./model.js";
import type { SessionStore } from "./state.js";
import { toast } from "./toast.js";

interface Field {
  name: string;
  label: string;
  input: HTMLInputElement | HTMLSelectElement;
  error: HTMLElement;
}

export class ControlsView {
  private readonly fields = new Map<string, Field>();
  private readonly form: HTMLFormElement;
  private csvText: string | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly store: SessionStore,
  ) {
    this.form = document.createElement("form");
    this.form.className = "controls";
    this.build();
    container.appendChild(this.form);
    store.subscribe(() => this.sync());
  }

  private addField(
    name: string, label: string,
    input: HTMLInputElement | HTMLSelectElement,
  ): Field {
    const wrap = document.createElement("label");
    wrap.className = "field";
    const caption = document.createElement("span");
    caption.textContent = label;
    const error = document.createElement("small");
    error.className = "field-error";
    input.setAttribute("name", name);
    wrap.append(caption, input, error);
    this.form.appendChild(wrap);
    const field = { name, label, input, error };
    this.fields.set(name, field);
    return field;
  }

  private numberInput(step = "any"): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "number";
    input.step = step;
    return input;
  }

  private build(): void {
    const file = document.createElement("input");
    file.type = "file";
    file.accept = ".csv,text/csv";
    file.addEventListener("change", async () => {
      const chosen = file.files?.[0];
      this.csvText = chosen ? await chosen.text() : null;
    });
    this.addField("file", "score CSV", file);

    const fps = this.numberInput();
    fps.value = "240";
    this.addField("fps", "FPS", fps);

    const leftCol = document.createElement("select");
    const rightCol = document.createElement("select");
    this.addField("left_column", "left column", leftCol);
    this.addField("right_column", "right column", rightCol);

    const load = document.createElement("button");
    load.type = "button";
    load.textContent = "Load file";
    load.addEventListener("click", () => void this.loadFile());
    this.form.appendChild(load);

    this.form.appendChild(document.createElement("hr"));

    const prominence = this.numberInput();
    prominence.value = "0.05";
    this.addField("peak.min_prominence", "min prominence", prominence);
    const distance = this.numberInput("1");
    distance.value = "15";
    this.addField("peak.min_distance", "min distance [frames]", distance);
    const width = this.numberInput();
    width.value = "3";
    this.addField("peak.min_width", "min width [frames]", width);

    const mode = document.createElement("select");
    for (const value of ["auto", "manual"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      mode.appendChild(option);
    }
    mode.addEventListener("change", () => this.toggleThresholdInputs());
    this.addField("threshold_mode", "threshold mode", mode);

    const thresholdLeft = this.numberInput();
    const thresholdRight = this.numberInput();
    this.addField("manual_threshold_left", "threshold left", thresholdLeft);
    this.addField("manual_threshold_right", "threshold right", thresholdRight);
    this.toggleThresholdInputs();

    const run = document.createElement("button");
    run.type = "button";
    run.className = "run";
    run.textContent = "Run detection";
    run.addEventListener("click", () => void this.runDetection());
    this.form.appendChild(run);
  }

  private toggleThresholdInputs(): void {
    const manual = this.fields.get("threshold_mode")!.input.value === "manual";
    for (const name of ["manual_threshold_left", "manual_threshold_right"]) {
      const field = this.fields.get(name)!;
      (field.input.parentElement as HTMLElement).style.display = manual ? "" : "none";
    }
  }

  private clearErrors(): void {
    for (const field of this.fields.values()) field.error.textContent = "";
  }

  private showErrors(errors: Record<string, string>): void {
    for (const [key, message] of Object.entries(errors)) {
      // server keys look like "fps", "columns", "params", "peak.min_distance"
      const field =
        this.fields.get(key) ??
        this.fields.get(`peak.${key}`) ??
        (key.includes("column") ? this.fields.get("left_column") : undefined) ??
        (key === "params" ? this.fields.get("peak.min_prominence") : undefined);
      if (field) field.error.textContent = message;
      else toast(message);
    }
  }

  private async loadFile(): Promise<void> {
    this.clearErrors();
    const fpsField = this.fields.get("fps")!;
    const fps = Number(fpsField.input.value);
    if (!(fps > 0)) {
      // client-side gate: no request is made with an invalid fps
      fpsField.error.textContent = "must be > 0";
      return;
    }
    if (!this.csvText) {
      this.fields.get("file")!.error.textContent = "choose a score CSV first";
      return;
    }
    try {
      await this.store.createSession(this.csvText, fps);
      window.location.hash = this.store.sessionId;
    } catch {
      this.showErrors(this.store.fieldErrors);
    }
  }

  /** Pre-fill the column pickers from the server's auto-selection. */
  private sync(): void {
    const session = this.store.session;
    const leftSel = this.fields.get("left_column")!.input as HTMLSelectElement;
    const rightSel = this.fields.get("right_column")!.input as HTMLSelectElement;
    if (!session) return;
    if (leftSel.options.length !== session.headers.length) {
      for (const select of [leftSel, rightSel]) {
        select.replaceChildren();
        for (const header of session.headers) {
          const option = document.createElement("option");
          option.value = header;
          option.textContent = header;
          select.appendChild(option);
        }
      }
    }
    if (session.columns) {
      if (leftSel.value !== session.columns.left) leftSel.value = session.columns.left;
      if (rightSel.value !== session.columns.right) rightSel.value = session.columns.right;
    }
  }

  private collectParams(): ParamsForm {
    const value = (name: string) => this.fields.get(name)!.input.value;
    const num = (name: string) => Number(value(name));
    const params: ParamsForm = {
      peak: {
        min_prominence: num("peak.min_prominence"),
        min_distance: num("peak.min_distance"),
        min_width: num("peak.min_width"),
      },
      threshold_mode: value("threshold_mode") as "auto" | "manual",
    };
    const leftSel = this.fields.get("left_column")!.input as HTMLSelectElement;
    const rightSel = this.fields.get("right_column")!.input as HTMLSelectElement;
    if (leftSel.value && rightSel.value) {
      params.left_column = leftSel.value;
      params.right_column = rightSel.value;
    }
    if (params.threshold_mode === "manual") {
      params.manual_threshold_left = num("manual_threshold_left");
      params.manual_threshold_right = num("manual_threshold_right");
    }
    return params;
  }

  private async runDetection(): Promise<void> {
    this.clearErrors();
    if (!this.store.session) {
      this.fields.get("file")!.error.textContent = "load a score CSV first";
      return;
    }
    const applied = await this.store.applyParams(this.collectParams());
    if (!applied) {
      this.showErrors(this.store.fieldErrors);
      return;
    }
    try {
      await this.store.runDetection();
      for (const warning of this.store.warnings) toast(warning);
    } catch {
      this.showErrors(this.store.fieldErrors);
      if (this.store.lastError) toast(this.store.lastError);
    }
  }
}
