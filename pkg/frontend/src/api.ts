/** Fetch wrappers for the bundle server; the viewer's only backend. */

import { Manifest, validateManifest } from "./manifest.js";

export async function getManifest(baseUrl: string): Promise<Manifest> {
  const res = await fetch(`${baseUrl}/manifest.json`);
  if (!res.ok) {
    throw new Error(`manifest fetch failed: HTTP ${res.status}`);
  }
  return validateManifest(await res.json());
}

export async function patchLabel(
  baseUrl: string,
  index: number,
  label: string,
): Promise<void> {
  const res = await fetch(`${baseUrl}/episodes/${index}/label`, {
    method: "PATCH",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ label }),
  });
  if (!res.ok) {
    throw new Error(`label save failed: HTTP ${res.status}`);
  }
}

export function thumbUrl(baseUrl: string, imageId: string): string {
  return `${baseUrl}/thumbs/${imageId}.jpg`;
}

export function imageUrl(baseUrl: string, imageId: string): string {
  return `${baseUrl}/images/${imageId}`;
}
