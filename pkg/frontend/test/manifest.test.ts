import { describe, expect, it } from "vitest";

import { ManifestError, validateManifest } from "../src/manifest.js";
import { cellKeyFromClick } from "../src/heatview.js";
import { timelineScale, xForTime, yForBpm } from "../src/timeline.js";

function rawManifest(): Record<string, unknown> {
  return {
    version: 1,
    span: { start: 0, end: 60 },
    params: {},
    reports: {},
    projection: {
      min_lat: 33, min_lon: 130, max_lat: 34, max_lon: 131,
      width: 64, height: 64, padding: 0.05,
    },
    windows: [{ start: 0, len: 30, mean_bpm: 70, n_samples: 30 }],
    frames: [],
    episodes: [],
    spots: { cell_px: 8, cells: { "0,0": [{ id: "a", lat: 33.5, lon: 130.5, t: 10 }] } },
    images: { a: { t: 10, blur_score: 200, sharp: true, thumb: "thumbs/a.jpg", source: "/a.jpg" } },
    heatmap: "heatmap.png",
  };
}

describe("validateManifest", () => {
  it("accepts a well-formed manifest", () => {
    expect(validateManifest(rawManifest()).version).toBe(1);
  });

  it("rejects a major version bump", () => {
    const raw = rawManifest();
    raw.version = 2;
    expect(() => validateManifest(raw)).toThrow(ManifestError);
    expect(() => validateManifest(raw)).toThrow(/version 2/);
  });

  it("rejects a non-integer or missing version", () => {
    const raw = rawManifest();
    raw.version = "one";
    expect(() => validateManifest(raw)).toThrow(ManifestError);
    delete raw.version;
    expect(() => validateManifest(raw)).toThrow(ManifestError);
  });

  it("rejects spot entries pointing at unknown images", () => {
    const raw = rawManifest();
    (raw.spots as { cells: Record<string, unknown> }).cells["0,0"] = [
      { id: "ghost", lat: 33, lon: 130, t: 1 },
    ];
    expect(() => validateManifest(raw)).toThrow(/ghost/);
  });

  it("rejects structural garbage", () => {
    expect(() => validateManifest(null)).toThrow(ManifestError);
    expect(() => validateManifest([1, 2])).toThrow(ManifestError);
    const raw = rawManifest();
    raw.windows = "nope";
    expect(() => validateManifest(raw)).toThrow(/windows/);
  });
});

describe("cellKeyFromClick", () => {
  it("scales display coordinates back to raster cells", () => {
    // 512-wide display of a 64-wide raster: click at 256 -> raster x 32 -> cell 4
    expect(cellKeyFromClick(256, 128, 512, 512, 64, 64, 8)).toBe("4,2");
  });

  it("is exact at the native size", () => {
    expect(cellKeyFromClick(17, 9, 64, 64, 64, 64, 8)).toBe("2,1");
  });
});

describe("timeline scale", () => {
  const manifest = validateManifest({
    ...rawManifest(),
    windows: [
      { start: 0, len: 30, mean_bpm: 60, n_samples: 30 },
      { start: 30, len: 30, mean_bpm: 80, n_samples: 30 },
    ],
  });

  it("spans the windows and their bpm range", () => {
    const scale = timelineScale(manifest);
    expect(scale.t0).toBe(0);
    expect(scale.t1).toBe(60);
    expect(scale.bpmMin).toBe(60);
    expect(scale.bpmMax).toBe(80);
  });

  it("maps time and bpm into canvas space", () => {
    const scale = timelineScale(manifest);
    expect(xForTime(30, scale, 600)).toBe(300);
    expect(yForBpm(80, scale, 100)).toBe(0);
    expect(yForBpm(60, scale, 100)).toBe(100);
  });
});
