/**
 * End-to-end against the real backend: build a synthetic bundle with the
 * pipeline CLI, serve it, then drive the viewer's state machine over HTTP —
 * click a known spot cell and check the displayed image is the spot-index
 * entry; save an episode label and check it survives a manifest reload.
 */

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { getManifest, patchLabel } from "../src/api.js";
import { clickSpot, initialState, manifestLoaded } from "../src/state.js";

const PYTHON = process.env.MOMENTMAP_PYTHON ?? "python3";

let workDir: string;
let server: ChildProcess;
let baseUrl: string;

function waitForServe(proc: ChildProcess): Promise<string> {
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error(`server never came up: ${buffer}`)), 30_000);
    proc.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/serving .* on (http:\/\/[^/]+)\//);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]!);
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code}): ${buffer}`));
    });
  });
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "momentmap-e2e-"));
  const dataDir = join(workDir, "data");
  const bundleDir = join(workDir, "bundle");
  execFileSync(PYTHON, ["-m", "momentmap.synth", dataDir, "--days", "1", "--hours", "0.5"]);
  execFileSync(PYTHON, [
    "-m", "momentmap.cli", "bundle",
    "--hr", join(dataDir, "hr.csv"),
    "--gps", join(dataDir, "gps.csv"),
    "--images", join(dataDir, "images"),
    "--size", "256x192",
    "--out", bundleDir,
  ]);
  server = spawn(PYTHON, [
    "-m", "momentmap.cli", "serve", "--bundle", bundleDir, "--addr", "127.0.0.1:0",
  ]);
  baseUrl = await waitForServe(server);
}, 120_000);

afterAll(() => {
  server?.kill();
  if (workDir) {
    rmSync(workDir, { recursive: true, force: true });
  }
});

describe("click-to-recall against the served bundle", () => {
  it("clicking a known spot cell displays that cell's spot-index image", async () => {
    const manifest = await getManifest(baseUrl);
    let state = manifestLoaded(initialState(), manifest);

    const cellKeys = Object.keys(manifest.spots.cells);
    expect(cellKeys.length).toBeGreaterThan(0);
    for (const key of cellKeys) {
      state = clickSpot(state, key);
      const entries = manifest.spots.cells[key]!;
      expect(state.selectedCell).toBe(key);
      expect(state.selectedImageId).toBe(entries[0]!.id);
      expect(state.cursor).toBe(entries[0]!.t);
    }
  });

  it("every id the viewer would request exists on the server", async () => {
    const manifest = await getManifest(baseUrl);
    const someCell = Object.keys(manifest.spots.cells)[0]!;
    const firstEntry = manifest.spots.cells[someCell]![0]!;
    const thumb = await fetch(`${baseUrl}/thumbs/${firstEntry.id}.jpg`);
    expect(thumb.status).toBe(200);
    const original = await fetch(`${baseUrl}/images/${firstEntry.id}`);
    expect(original.status).toBe(200);
    const heat = await fetch(`${baseUrl}/heatmap.png`);
    expect(heat.status).toBe(200);
  });

  it("label PATCH persists across a manifest reload", async () => {
    const manifest = await getManifest(baseUrl);
    expect(manifest.episodes.length).toBeGreaterThan(0);
    await patchLabel(baseUrl, 0, "coffee with friends");
    const reloaded = await getManifest(baseUrl);
    expect(reloaded.episodes[0]!.label).toBe("coffee with friends");
    // everything else is untouched
    expect(reloaded.episodes.length).toBe(manifest.episodes.length);
    expect(reloaded.windows).toEqual(manifest.windows);
  });
});
