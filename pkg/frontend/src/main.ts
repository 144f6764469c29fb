import { MonitorApi } from "./api.js";
import { chartSvg } from "./chart.js";
import {
  DEFAULT_FORM,
  TestForm,
  applySwepisPreset,
  toSessionConfig,
  validateForm,
} from "./form.js";
import { SessionController, SessionView, bannerState } from "./session.js";
import type { Group } from "./types.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8710";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): TestForm {
  const restricted = el<HTMLInputElement>("restricted").checked;
  const deltaRaw = el<HTMLInputElement>("delta").value;
  const controlRaw = el<HTMLInputElement>("control-rate").value;
  return {
    nA: Number(el<HTMLInputElement>("na").value),
    nB: Number(el<HTMLInputElement>("nb").value),
    alpha: Number(el<HTMLInputElement>("alpha").value),
    gamma: Number(el<HTMLInputElement>("gamma").value),
    restricted,
    divergence: el<HTMLSelectElement>("divergence").value as
      | "difference"
      | "log_odds_ratio",
    delta: deltaRaw === "" ? null : Number(deltaRaw),
    controlRate: controlRaw === "" ? null : Number(controlRaw),
    gridPrecision: Number(el<HTMLInputElement>("grid-precision").value),
  };
}

function writeForm(form: TestForm): void {
  el<HTMLInputElement>("na").value = String(form.nA);
  el<HTMLInputElement>("nb").value = String(form.nB);
  el<HTMLInputElement>("alpha").value = String(form.alpha);
  el<HTMLInputElement>("gamma").value = String(form.gamma);
  el<HTMLInputElement>("restricted").checked = form.restricted;
  el<HTMLSelectElement>("divergence").value = form.divergence;
  el<HTMLInputElement>("delta").value =
    form.delta === null ? "" : String(form.delta);
  el<HTMLInputElement>("control-rate").value =
    form.controlRate === null ? "" : String(form.controlRate);
  el<HTMLInputElement>("grid-precision").value = String(form.gridPrecision);
}

function render(view: SessionView): void {
  const banner = el<HTMLDivElement>("banner");
  const state = bannerState(view);
  banner.dataset.state = state;
  const snapshot = view.snapshot;
  if (!snapshot) {
    banner.textContent = "no session";
    return;
  }
  if (state === "stop") {
    banner.textContent = `STOP - evidence ${snapshot.e_value.toPrecision(4)} reached 1/alpha = ${snapshot.threshold}`;
  } else if (state === "stopped") {
    banner.textContent = `stopped (${snapshot.status}) at e-value ${snapshot.e_value.toPrecision(4)}`;
  } else {
    banner.textContent = `running - e-value ${snapshot.e_value.toPrecision(4)} of ${snapshot.threshold}`;
  }
  el<HTMLSpanElement>("e-value").textContent = snapshot.e_value.toPrecision(6);
  el<HTMLSpanElement>("blocks").textContent = String(snapshot.blocks_completed);
  el<HTMLSpanElement>("pending-a").textContent = String(snapshot.pending.a);
  el<HTMLSpanElement>("pending-b").textContent = String(snapshot.pending.b);
  el<HTMLSpanElement>("queued").textContent = String(view.queued.length);
  el<HTMLDivElement>("chart").innerHTML = chartSvg(snapshot);
  const warning = el<HTMLDivElement>("connection");
  warning.hidden = view.connection !== "offline";
  const error = el<HTMLDivElement>("form-errors");
  error.textContent = view.error ?? "";
  const running = state === "running";
  for (const id of ["a-yes", "a-no", "b-yes", "b-no"]) {
    el<HTMLButtonElement>(id).disabled = !running;
  }
}

export function boot(): void {
  const api = new MonitorApi(SERVICE_URL);
  const controller = new SessionController(api, render);
  writeForm(DEFAULT_FORM);

  el<HTMLButtonElement>("preset-swepis").addEventListener("click", () => {
    writeForm(applySwepisPreset(readForm()));
  });

  el<HTMLFormElement>("config-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const form = readForm();
    const errors = validateForm(form);
    const errorBox = el<HTMLDivElement>("form-errors");
    if (Object.keys(errors).length > 0) {
      errorBox.textContent = Object.entries(errors)
        .map(([field, message]) => `${field}: ${message}`)
        .join("; ");
      return;
    }
    errorBox.textContent = "";
    void controller.start(toSessionConfig(form));
  });

  const record = (group: Group, y: 0 | 1) => () =>
    void controller.record(group, y);
  el<HTMLButtonElement>("a-yes").addEventListener("click", record("a", 1));
  el<HTMLButtonElement>("a-no").addEventListener("click", record("a", 0));
  el<HTMLButtonElement>("b-yes").addEventListener("click", record("b", 1));
  el<HTMLButtonElement>("b-no").addEventListener("click", record("b", 0));
  el<HTMLButtonElement>("retry").addEventListener("click", () => {
    void controller.retry();
  });
  el<HTMLButtonElement>("stop-manual").addEventListener("click", () => {
    void controller.stop();
  });
}

if (typeof document !== "undefined") {
  boot();
}
