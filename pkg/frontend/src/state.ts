/**
 * Viewer state and its pure transitions.
 *
 * The DOM layer renders from this state and never mutates it directly, so
 * the selection invariants (no dangling indices after a manifest reload, no
 * stale image selection after switching spots) live in one testable place.
 */

import type { Manifest, SpotEntry } from "./manifest.js";

export interface ViewerState {
  manifest: Manifest | null;
  error: string | null;
  selectedCell: string | null;
  selectedImageId: string | null;
  selectedEpisode: number | null;
  cursor: number | null; // timeline position, epoch seconds
}

export function initialState(): ViewerState {
  return {
    manifest: null,
    error: null,
    selectedCell: null,
    selectedImageId: null,
    selectedEpisode: null,
    cursor: null,
  };
}

/** A fresh or reloaded manifest clears every selection: nothing may dangle. */
export function manifestLoaded(state: ViewerState, manifest: Manifest): ViewerState {
  return {
    ...state,
    manifest,
    error: null,
    selectedCell: null,
    selectedImageId: null,
    selectedEpisode: null,
    cursor: manifest.windows.length > 0 ? manifest.windows[0]!.start : null,
  };
}

export function manifestFailed(state: ViewerState, message: string): ViewerState {
  return { ...initialState(), error: message };
}

export function cellEntries(state: ViewerState, cellKey: string): SpotEntry[] {
  return state.manifest?.spots.cells[cellKey] ?? [];
}

/**
 * Click-to-recall: select a spot cell, show its first (earliest) image, and
 * jump the timeline cursor to that image's capture time. Clicking an empty
 * or unknown cell is a no-op.
 */
export function clickSpot(state: ViewerState, cellKey: string): ViewerState {
  const entries = cellEntries(state, cellKey);
  if (entries.length === 0) {
    return state;
  }
  const first = entries[0]!;
  return {
    ...state,
    selectedCell: cellKey,
    selectedImageId: first.id,
    cursor: first.t,
  };
}

/** Select one image from the current cell's thumbnail strip. */
export function selectImage(state: ViewerState, imageId: string): ViewerState {
  if (state.selectedCell === null) {
    return state;
  }
  const entry = cellEntries(state, state.selectedCell).find((e) => e.id === imageId);
  if (entry === undefined) {
    return state;
  }
  return { ...state, selectedImageId: imageId, cursor: entry.t };
}

export function selectEpisode(state: ViewerState, index: number): ViewerState {
  const episodes = state.manifest?.episodes ?? [];
  if (index < 0 || index >= episodes.length) {
    return state;
  }
  return { ...state, selectedEpisode: index, cursor: episodes[index]!.start };
}

/** Optimistic label edit; the caller PATCHes and reverts on failure. */
export function labelEdited(state: ViewerState, index: number, label: string): ViewerState {
  return setLabel(state, index, label);
}

export function labelReverted(state: ViewerState, index: number, previous: string | null): ViewerState {
  return setLabel(state, index, previous);
}

function setLabel(state: ViewerState, index: number, label: string | null): ViewerState {
  const manifest = state.manifest;
  if (manifest === null || index < 0 || index >= manifest.episodes.length) {
    return state;
  }
  const episodes = manifest.episodes.map((ep, i) =>
    i === index ? { ...ep, label } : ep,
  );
  return { ...state, manifest: { ...manifest, episodes } };
}
