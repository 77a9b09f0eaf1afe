/**
 * Heat-map pane: the rendered PNG plus invisible click targets derived from
 * the manifest's precomputed spot grid (no client-side nearest-point math).
 */

import type { Manifest } from "./manifest.js";

/**
 * Map a click position on the displayed image to a spot-grid cell key.
 * Display size may differ from raster size; scale back first.
 */
export function cellKeyFromClick(
  offsetX: number,
  offsetY: number,
  displayWidth: number,
  displayHeight: number,
  rasterWidth: number,
  rasterHeight: number,
  cellPx: number,
): string {
  const px = (offsetX / displayWidth) * rasterWidth;
  const py = (offsetY / displayHeight) * rasterHeight;
  const cx = Math.floor(px / cellPx);
  const cy = Math.floor(py / cellPx);
  return `${cx},${cy}`;
}

export interface HeatView {
  root: HTMLElement;
  onSpotClick: (handler: (cellKey: string) => void) => void;
}

export function createHeatView(manifest: Manifest, heatmapUrl: string): HeatView {
  const root = document.createElement("div");
  root.className = "heatview";
  const img = document.createElement("img");
  img.src = heatmapUrl;
  img.alt = "visit-frequency heat map";
  img.draggable = false;
  root.appendChild(img);

  const populated = new Set(Object.keys(manifest.spots.cells));
  let handler: ((cellKey: string) => void) | null = null;

  img.addEventListener("click", (event) => {
    if (handler === null) {
      return;
    }
    const rect = img.getBoundingClientRect();
    const key = cellKeyFromClick(
      event.clientX - rect.left,
      event.clientY - rect.top,
      rect.width,
      rect.height,
      manifest.projection.width,
      manifest.projection.height,
      manifest.spots.cell_px,
    );
    if (populated.has(key)) {
      handler(key);
    }
  });

  return {
    root,
    onSpotClick: (h) => {
      handler = h;
    },
  };
}
