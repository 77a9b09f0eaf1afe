/**
 * Review-bundle manifest types and validation.
 *
 * The viewer is a pure consumer: every id it ever requests comes out of a
 * validated manifest, and unknown major versions are rejected up front.
 */

export const SUPPORTED_VERSION = 1;

export interface Span {
  start: number;
  end: number;
}

export interface ProjectionInfo {
  min_lat: number;
  min_lon: number;
  max_lat: number;
  max_lon: number;
  width: number;
  height: number;
  padding: number;
}

export interface WindowRow {
  start: number;
  len: number;
  mean_bpm: number;
  n_samples: number;
}

export interface FrameRow {
  image_id: string;
  window_start: number;
  mean_bpm: number;
  t: number;
}

export interface EpisodeRow {
  start: number;
  end: number;
  window_starts: number[];
  peak_delta: number;
  frames: string[];
  label: string | null;
}

export interface SpotEntry {
  id: string;
  lat: number;
  lon: number;
  t: number;
}

export interface Spots {
  cell_px: number;
  cells: Record<string, SpotEntry[]>;
}

export interface ImageInfo {
  t: number;
  blur_score: number;
  sharp: boolean;
  thumb: string;
  source: string;
}

export interface Manifest {
  version: number;
  span: Span;
  params: Record<string, unknown>;
  reports: Record<string, { accepted: number; rejected: number; duplicates: number }>;
  projection: ProjectionInfo;
  windows: WindowRow[];
  frames: FrameRow[];
  episodes: EpisodeRow[];
  spots: Spots;
  images: Record<string, ImageInfo>;
  heatmap: string;
}

export class ManifestError extends Error {}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

/** Structural gate; throws ManifestError with a user-displayable message. */
export function validateManifest(raw: unknown): Manifest {
  if (!isObject(raw)) {
    throw new ManifestError("manifest is not a JSON object");
  }
  const version = raw.version;
  if (typeof version !== "number" || !Number.isInteger(version) || version < 1) {
    throw new ManifestError("manifest version is missing or not a positive integer");
  }
  if (version !== SUPPORTED_VERSION) {
    throw new ManifestError(
      `manifest version ${version} is not supported (viewer understands ${SUPPORTED_VERSION})`,
    );
  }
  for (const key of ["windows", "frames", "episodes"] as const) {
    if (!Array.isArray(raw[key])) {
      throw new ManifestError(`manifest ${key} must be an array`);
    }
  }
  if (!isObject(raw.spots) || !isObject((raw.spots as Record<string, unknown>).cells)) {
    throw new ManifestError("manifest spots.cells must be an object");
  }
  if (!isObject(raw.images)) {
    throw new ManifestError("manifest images must be an object");
  }
  if (!isObject(raw.projection)) {
    throw new ManifestError("manifest projection must be an object");
  }
  if (raw.heatmap !== "heatmap.png") {
    throw new ManifestError("manifest heatmap reference is missing");
  }
  const manifest = raw as unknown as Manifest;
  for (const [cell, entries] of Object.entries(manifest.spots.cells)) {
    if (!Array.isArray(entries) || entries.length === 0) {
      throw new ManifestError(`spot cell ${cell} has no entries`);
    }
    for (const entry of entries) {
      if (!(entry.id in manifest.images)) {
        throw new ManifestError(`spot cell ${cell} references unknown image ${entry.id}`);
      }
    }
  }
  for (const episode of manifest.episodes) {
    for (const id of episode.frames) {
      if (!(id in manifest.images)) {
        throw new ManifestError(`episode references unknown image ${id}`);
      }
    }
  }
  return manifest;
}
