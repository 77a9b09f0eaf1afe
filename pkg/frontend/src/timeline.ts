/**
 * Heart-rate timeline: mean bpm per window as a line, special-moment
 * episodes as highlight bands, and a cursor that follows the selection.
 */

import type { Manifest } from "./manifest.js";

export interface TimelineScale {
  t0: number;
  t1: number;
  bpmMin: number;
  bpmMax: number;
}

export function timelineScale(manifest: Manifest): TimelineScale {
  const windows = manifest.windows;
  if (windows.length === 0) {
    return { t0: 0, t1: 1, bpmMin: 0, bpmMax: 1 };
  }
  let bpmMin = Infinity;
  let bpmMax = -Infinity;
  for (const w of windows) {
    if (w.mean_bpm < bpmMin) bpmMin = w.mean_bpm;
    if (w.mean_bpm > bpmMax) bpmMax = w.mean_bpm;
  }
  if (bpmMin === bpmMax) {
    bpmMin -= 1;
    bpmMax += 1;
  }
  const last = windows[windows.length - 1]!;
  return { t0: windows[0]!.start, t1: last.start + last.len, bpmMin, bpmMax };
}

export function xForTime(t: number, scale: TimelineScale, width: number): number {
  return ((t - scale.t0) / (scale.t1 - scale.t0)) * width;
}

export function yForBpm(bpm: number, scale: TimelineScale, height: number): number {
  return height - ((bpm - scale.bpmMin) / (scale.bpmMax - scale.bpmMin)) * height;
}

export function drawTimeline(
  canvas: HTMLCanvasElement,
  manifest: Manifest,
  cursor: number | null,
  selectedEpisode: number | null,
): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const { width, height } = canvas;
  const scale = timelineScale(manifest);
  ctx.clearRect(0, 0, width, height);

  manifest.episodes.forEach((ep, i) => {
    ctx.fillStyle = i === selectedEpisode ? "rgba(255,140,0,0.45)" : "rgba(255,200,60,0.25)";
    const x0 = xForTime(ep.start, scale, width);
    const x1 = xForTime(ep.end, scale, width);
    ctx.fillRect(x0, 0, Math.max(1, x1 - x0), height);
  });

  ctx.strokeStyle = "#c0392b";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  let pen = false;
  let prevEnd = -Infinity;
  for (const w of manifest.windows) {
    const x = xForTime(w.start + w.len / 2, scale, width);
    const y = yForBpm(w.mean_bpm, scale, height);
    // lift the pen across window gaps so dropouts stay visible
    if (!pen || w.start !== prevEnd) {
      ctx.moveTo(x, y);
      pen = true;
    } else {
      ctx.lineTo(x, y);
    }
    prevEnd = w.start + w.len;
  }
  ctx.stroke();

  if (cursor !== null) {
    const x = xForTime(cursor, scale, width);
    ctx.strokeStyle = "#2c3e50";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
}
