/** DOM wiring: render the viewer from state, route events into transitions. */

import { getManifest, imageUrl, patchLabel, thumbUrl } from "./api.js";
import { createHeatView } from "./heatview.js";
import { ManifestError } from "./manifest.js";
import {
  ViewerState,
  cellEntries,
  clickSpot,
  initialState,
  labelEdited,
  labelReverted,
  manifestFailed,
  manifestLoaded,
  selectEpisode,
  selectImage,
} from "./state.js";
import { drawTimeline } from "./timeline.js";

const BASE_URL = "";

let state: ViewerState = initialState();

function setState(next: ViewerState): void {
  state = next;
  render();
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderError(root: HTMLElement, message: string): void {
  const banner = el("div", "banner-error", message);
  root.appendChild(banner);
}

function renderEpisodes(root: HTMLElement): void {
  const pane = el("section", "episodes");
  pane.appendChild(el("h2", undefined, "Special moments"));
  const manifest = state.manifest!;
  if (manifest.episodes.length === 0) {
    pane.appendChild(el("p", "empty", "No special moments were detected in this recording."));
    root.appendChild(pane);
    return;
  }
  const list = el("ul");
  manifest.episodes.forEach((ep, i) => {
    const item = el("li", i === state.selectedEpisode ? "selected" : undefined);
    const when = new Date(ep.start * 1000).toISOString().slice(0, 19).replace("T", " ");
    const headline = el("button", "episode-head",
      `${when} · ${ep.frames.length} photos · peak ${ep.peak_delta.toFixed(1)} bpm`);
    headline.addEventListener("click", () => setState(selectEpisode(state, i)));
    item.appendChild(headline);

    const label = el("input") as HTMLInputElement;
    label.placeholder = "describe this moment";
    label.value = ep.label ?? "";
    label.addEventListener("change", () => void saveLabel(i, label.value));
    item.appendChild(label);

    if (i === state.selectedEpisode && ep.frames.length > 0) {
      const strip = el("div", "strip");
      for (const id of ep.frames) {
        const thumb = el("img", "thumb") as HTMLImageElement;
        thumb.src = thumbUrl(BASE_URL, id);
        thumb.title = id;
        strip.appendChild(thumb);
      }
      item.appendChild(strip);
    }
    list.appendChild(item);
  });
  pane.appendChild(list);
  root.appendChild(pane);
}

async function saveLabel(index: number, label: string): Promise<void> {
  const previous = state.manifest?.episodes[index]?.label ?? null;
  setState(labelEdited(state, index, label));
  try {
    await patchLabel(BASE_URL, index, label);
  } catch {
    setState(labelReverted(state, index, previous));
    toast("label save failed; reverted");
  }
}

function toast(message: string): void {
  const node = el("div", "toast", message);
  document.body.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

function renderSpotPanel(root: HTMLElement): void {
  if (state.selectedCell === null) {
    root.appendChild(el("p", "hint", "Click a bright spot on the heat map to recall its photos."));
    return;
  }
  const entries = cellEntries(state, state.selectedCell);
  const panel = el("section", "spot-panel");
  const strip = el("div", "strip");
  for (const entry of entries) {
    const thumb = el("img", entry.id === state.selectedImageId ? "thumb selected" : "thumb") as HTMLImageElement;
    thumb.src = thumbUrl(BASE_URL, entry.id);
    thumb.title = entry.id;
    thumb.addEventListener("click", () => setState(selectImage(state, entry.id)));
    strip.appendChild(thumb);
  }
  panel.appendChild(strip);
  if (state.selectedImageId !== null) {
    const full = el("img", "full") as HTMLImageElement;
    full.src = imageUrl(BASE_URL, state.selectedImageId);
    full.alt = state.selectedImageId;
    panel.appendChild(full);
  }
  root.appendChild(panel);
}

function render(): void {
  const root = document.getElementById("app");
  if (root === null) {
    return;
  }
  root.textContent = "";
  if (state.error !== null) {
    renderError(root, state.error);
    return;
  }
  if (state.manifest === null) {
    root.appendChild(el("p", "hint", "Loading review bundle…"));
    return;
  }

  const heat = createHeatView(state.manifest, `${BASE_URL}/heatmap.png`);
  heat.onSpotClick((cellKey) => setState(clickSpot(state, cellKey)));
  root.appendChild(heat.root);

  const canvas = el("canvas", "timeline") as HTMLCanvasElement;
  canvas.width = 960;
  canvas.height = 140;
  drawTimeline(canvas, state.manifest, state.cursor, state.selectedEpisode);
  root.appendChild(canvas);

  renderSpotPanel(root);
  renderEpisodes(root);
}

async function boot(): Promise<void> {
  render();
  try {
    const manifest = await getManifest(BASE_URL);
    setState(manifestLoaded(state, manifest));
  } catch (err) {
    const message = err instanceof ManifestError ? err.message : `could not load bundle: ${err}`;
    setState(manifestFailed(state, message));
  }
}

void boot();
