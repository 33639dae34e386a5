/**
 * Explorer wiring: controls on the left, live SVG scene on the right.
 *
 * The app is a thin client.  Every configuration coordinate on screen
 * comes from a /api/scene response; the sliders and the t0 drag handle
 * only assemble request bodies.  Requests are debounced (<= 100 ms) and
 * sequence-numbered so stale responses never paint over fresh ones.
 */

import { SequencedClient } from "./api.js";
import type { SceneDoc, ServiceError } from "./api.js";
import { debounce } from "./debounce.js";
import {
  handlePosition,
  pointerToT0,
  residualGauge,
  ringLayers,
  sceneBox,
} from "./render.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PRESETS = [
  "7#(3,1;2,3;1,2)",
  "8#(3,1;2,3;1,2)",
  "10#(2,3;4,2;3,4)",
  "13#(5,2;4,5;2,4)",
  "10#(4,1;2,3;1,4;3,2)",
  "12#(5,4;1,4)",
];

interface AppState {
  symbol: string;
  symbolValid: boolean;
  A: number;
  B: number;
  winding: number;
  t0: number;
  lambdaStar: number | null;
  lambdaOverride: number | null;
  breakIt: boolean;
  hiddenLayers: Set<string>;
}

const state: AppState = {
  symbol: PRESETS[0],
  symbolValid: true,
  A: 4.0,
  B: 1.0,
  winding: 1,
  t0: 0.3,
  lambdaStar: null,
  lambdaOverride: null,
  breakIt: false,
  hiddenLayers: new Set(),
};

const client = new SequencedClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

function showError(error: ServiceError | null): void {
  const box = byId<HTMLDivElement>("error-box");
  if (error === null) {
    box.textContent = "";
    box.classList.remove("visible");
    return;
  }
  box.textContent = `${error.code} at ${error.step}: ${error.message}`;
  box.classList.add("visible");
}

function renderGauge(residual: number, verdict: string): void {
  const gauge = residualGauge(residual);
  const bar = byId<HTMLDivElement>("gauge-bar");
  bar.style.width = `${Math.round(gauge.level * 100)}%`;
  bar.className = gauge.ok ? "gauge-ok" : "gauge-bad";
  byId<HTMLSpanElement>("gauge-text").textContent = gauge.text;
  const badge = byId<HTMLSpanElement>("verdict");
  badge.textContent = verdict;
  badge.className = verdict.startsWith("proper") ? "badge-ok" : "badge-bad";
}

function renderLayerToggles(scene: SceneDoc): void {
  const holder = byId<HTMLDivElement>("layers");
  holder.replaceChildren();
  for (const ring of scene.rings) {
    const label = el("label", { class: "layer-toggle" });
    const input = el("input", { type: "checkbox" }) as HTMLInputElement;
    input.checked = !state.hiddenLayers.has(ring.label);
    input.addEventListener("change", () => {
      if (input.checked) state.hiddenLayers.delete(ring.label);
      else state.hiddenLayers.add(ring.label);
      applyLayerVisibility();
    });
    label.append(input, document.createTextNode(` ${ring.label}`));
    holder.append(label);
  }
}

function applyLayerVisibility(): void {
  const svg = byId<HTMLElement>("scene");
  for (const group of Array.from(svg.querySelectorAll("g[data-ring]"))) {
    const label = group.getAttribute("data-ring") ?? "";
    (group as SVGGElement).style.display = state.hiddenLayers.has(label)
      ? "none"
      : "";
  }
}

function renderScene(scene: SceneDoc): void {
  const svg = byId<HTMLElement>("scene") as unknown as SVGSVGElement;
  const box = sceneBox(scene);
  svg.setAttribute(
    "viewBox",
    `${box.x} ${-(box.y + box.h)} ${box.w} ${box.h}`,
  );
  svg.replaceChildren();
  const stroke = Math.max(box.w, box.h) / 400;
  // the drag track: the outer ellipse the user chose with the sliders
  const track = document.createElementNS(SVG_NS, "ellipse");
  track.setAttribute("cx", "0");
  track.setAttribute("cy", "0");
  track.setAttribute("rx", String(Math.sqrt(state.A)));
  track.setAttribute("ry", String(Math.sqrt(state.B)));
  track.setAttribute("fill", "none");
  track.setAttribute("stroke", "#dddddd");
  track.setAttribute("stroke-width", String(stroke));
  svg.append(track);
  for (const layer of ringLayers(scene, box)) {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("data-ring", layer.label);
    for (const seg of layer.segments) {
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(seg.x1));
      line.setAttribute("y1", String(-seg.y1));
      line.setAttribute("x2", String(seg.x2));
      line.setAttribute("y2", String(-seg.y2));
      line.setAttribute("stroke", "#3366cc");
      line.setAttribute("stroke-width", String(stroke));
      group.append(line);
    }
    for (const point of layer.points) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", String(point.x));
      dot.setAttribute("cy", String(-point.y));
      dot.setAttribute("r", String(2.5 * stroke));
      dot.setAttribute("fill", "#1a1a1a");
      group.append(dot);
    }
    svg.append(group);
  }
  const handle = handlePosition(scene);
  if (handle !== null) {
    const grip = document.createElementNS(SVG_NS, "circle");
    grip.setAttribute("id", "t0-handle");
    grip.setAttribute("cx", String(handle.x));
    grip.setAttribute("cy", String(-handle.y));
    grip.setAttribute("r", String(6 * stroke));
    grip.setAttribute("fill", "#cc3333");
    grip.setAttribute("cursor", "grab");
    svg.append(grip);
  }
  applyLayerVisibility();
}

async function requestScene(): Promise<void> {
  if (!state.symbolValid) return;
  const body = {
    symbol: state.symbol,
    axes: [state.A, state.B] as [number, number],
    winding: state.winding,
    t0: state.t0,
    ...(state.breakIt && state.lambdaOverride !== null
      ? { lambda: state.lambdaOverride }
      : {}),
  };
  const result = await client.postScene(body);
  if (result.kind === "stale" || result.kind === "aborted") return;
  if (result.kind === "error") {
    showError(result.error);
    return;
  }
  showError(null);
  if (result.lambda !== undefined) {
    state.lambdaStar = result.lambda;
    syncLambdaSlider();
  }
  renderScene(result.scene);
  renderLayerToggles(result.scene);
  renderGauge(result.scene.closure_residual, result.scene.audit.verdict);
}

const scheduleScene = debounce(() => void requestScene(), 100);

async function validateNow(): Promise<void> {
  const verdict = await client.validateSymbol(state.symbol);
  const note = byId<HTMLSpanElement>("symbol-note");
  state.symbolValid = verdict.valid;
  if (verdict.valid) {
    note.textContent = verdict.trivial ? "trivial (movable)" : "nontrivial";
    note.className = "note-ok";
    scheduleScene();
  } else {
    note.textContent = `${verdict.code}: ${verdict.message}`;
    note.className = "note-bad";
  }
}

const scheduleValidate = debounce(() => void validateNow(), 100);

function syncLambdaSlider(): void {
  const slider = byId<HTMLInputElement>("lambda");
  const label = byId<HTMLSpanElement>("lambda-value");
  if (state.lambdaStar === null) return;
  const shown =
    state.breakIt && state.lambdaOverride !== null
      ? state.lambdaOverride
      : state.lambdaStar;
  slider.max = String(state.B * 0.999);
  slider.value = String(shown);
  label.textContent = shown.toFixed(6);
}

function wireControls(): void {
  const symbolInput = byId<HTMLInputElement>("symbol");
  symbolInput.value = state.symbol;
  const presets = byId<HTMLDataListElement>("symbol-presets");
  for (const preset of PRESETS) {
    presets.append(el("option", { value: preset }));
  }
  symbolInput.addEventListener("input", () => {
    state.symbol = symbolInput.value;
    scheduleValidate();
  });

  for (const [id, key] of [
    ["axis-a", "A"],
    ["axis-b", "B"],
  ] as const) {
    const slider = byId<HTMLInputElement>(id);
    slider.value = String(state[key]);
    slider.addEventListener("input", () => {
      state[key] = Number(slider.value);
      state.lambdaOverride = null;
      byId<HTMLSpanElement>(`${id}-value`).textContent = slider.value;
      scheduleScene();
    });
    byId<HTMLSpanElement>(`${id}-value`).textContent = slider.value;
  }

  const winding = byId<HTMLInputElement>("winding");
  winding.value = String(state.winding);
  winding.addEventListener("input", () => {
    state.winding = Number(winding.value);
    state.lambdaOverride = null;
    scheduleScene();
  });

  const breakIt = byId<HTMLInputElement>("break-it");
  const lambda = byId<HTMLInputElement>("lambda");
  breakIt.addEventListener("change", () => {
    state.breakIt = breakIt.checked;
    lambda.disabled = !state.breakIt;
    if (!state.breakIt) {
      state.lambdaOverride = null;
      scheduleScene();
    }
  });
  lambda.disabled = true;
  lambda.addEventListener("input", () => {
    state.lambdaOverride = Number(lambda.value);
    byId<HTMLSpanElement>("lambda-value").textContent =
      state.lambdaOverride.toFixed(6);
    scheduleScene();
  });

  byId<HTMLButtonElement>("snap").addEventListener("click", () => {
    state.lambdaOverride = null;
    syncLambdaSlider();
    scheduleScene();
  });

  wireDrag();
}

function wireDrag(): void {
  const svg = byId<HTMLElement>("scene") as unknown as SVGSVGElement;
  let dragging = false;

  const toScene = (event: PointerEvent): { x: number; y: number } | null => {
    const ctm = svg.getScreenCTM();
    if (ctm === null) return null;
    const point = new DOMPoint(event.clientX, event.clientY).matrixTransform(
      ctm.inverse(),
    );
    return { x: point.x, y: -point.y };
  };

  svg.addEventListener("pointerdown", (event) => {
    const target = event.target as Element;
    if (target.id !== "t0-handle") return;
    dragging = true;
    svg.setPointerCapture(event.pointerId);
  });
  svg.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    const position = toScene(event);
    if (position === null) return;
    state.t0 = pointerToT0(position.x, position.y, [state.A, state.B]);
    byId<HTMLSpanElement>("t0-value").textContent = state.t0.toFixed(4);
    scheduleScene();
  });
  const stop = () => {
    dragging = false;
  };
  svg.addEventListener("pointerup", stop);
  svg.addEventListener("pointerleave", stop);
}

export function start(): void {
  wireControls();
  void validateNow();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  start();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", start);
}
