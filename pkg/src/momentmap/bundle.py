"""Self-contained review bundles.

A bundle directory holds manifest.json (every structure the viewer needs),
heatmap.png, and thumbs/ with one downscaled JPEG per sharp image. The
manifest is written with sorted keys and floats quantized to 6 decimals, so
regenerating from identical inputs yields byte-identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from PIL import Image

from .fusion import AlignedFrame, HrWindow
from .heatmap import Projection, SpotEntry, SpotIndex
from .ingest import Dataset, ParseReport
from .moments import Episode

MANIFEST_VERSION = 1
THUMB_MAX_SIDE = 256
THUMB_JPEG_QUALITY = 85


class BundleError(Exception):
    """A bundle cannot be built or read."""


def round6(value: float) -> float:
    """The manifest's fixed float precision."""
    return round(float(value), 6)


def _quantize(obj: Any) -> Any:
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round6(obj)
    if isinstance(obj, dict):
        return {k: _quantize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize(v) for v in obj]
    return obj


def _cell_key(cell: tuple[int, int]) -> str:
    return f"{cell[0]},{cell[1]}"


def _parse_cell_key(key: str) -> tuple[int, int]:
    cx, cy = key.split(",")
    return int(cx), int(cy)


def build_manifest(
    dataset: Dataset,
    reports: dict[str, ParseReport],
    windows: Sequence[HrWindow],
    frames: Sequence[AlignedFrame],
    episodes: Sequence[Episode],
    spots: SpotIndex,
    projection: Projection,
    params: dict[str, Any],
) -> dict[str, Any]:
    """Assemble the manifest document (pure; no files touched).

    All floats are quantized here, so the returned dict is exactly what a
    reader will get back from disk.
    """
    times = (
        [s.t for s in dataset.hr]
        + [f.t for f in dataset.fixes]
        + [i.t for i in dataset.images]
    )
    span = {"start": min(times), "end": max(times)} if times else {"start": 0, "end": 0}
    manifest = {
        "version": MANIFEST_VERSION,
        "span": span,
        "params": params,
        "reports": {
            name: {"accepted": r.accepted, "rejected": r.rejected, "duplicates": r.duplicates}
            for name, r in reports.items()
        },
        "projection": {
            "min_lat": projection.min_lat,
            "min_lon": projection.min_lon,
            "max_lat": projection.max_lat,
            "max_lon": projection.max_lon,
            "width": projection.width,
            "height": projection.height,
            "padding": projection.padding,
        },
        "windows": [
            {"start": w.start, "len": w.len, "mean_bpm": w.mean_bpm, "n_samples": w.n_samples}
            for w in windows
        ],
        "frames": [
            {
                "image_id": f.image_id,
                "window_start": f.window_start,
                "mean_bpm": f.mean_bpm,
                "t": f.t,
            }
            for f in frames
        ],
        "episodes": [
            {
                "start": ep.start,
                "end": ep.end,
                "window_starts": list(ep.window_starts),
                "peak_delta": ep.peak_delta,
                "frames": list(ep.frames),
                "label": ep.label,
            }
            for ep in episodes
        ],
        "spots": {
            "cell_px": spots.cell_px,
            "cells": {
                _cell_key(cell): [
                    {"id": e.image_id, "lat": e.lat, "lon": e.lon, "t": e.t}
                    for e in entries
                ]
                for cell, entries in spots.cells.items()
            },
        },
        "images": {
            img.id: {
                "t": img.t,
                "blur_score": img.blur_score,
                "sharp": img.sharp,
                "thumb": f"thumbs/{img.id}.jpg",
                "source": img.path,
            }
            for img in dataset.images
            if img.sharp
        },
        "heatmap": "heatmap.png",
    }
    return _quantize(manifest)


def dump_manifest(manifest: dict[str, Any]) -> bytes:
    return (json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode("utf-8")


def atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_thumbnail(src: str | Path, dest: Path) -> None:
    with Image.open(src) as img:
        thumb = img.convert("RGB")
        thumb.thumbnail((THUMB_MAX_SIDE, THUMB_MAX_SIDE))
        thumb.save(dest, format="JPEG", quality=THUMB_JPEG_QUALITY)


@dataclass
class ReviewBundle:
    """Descriptor for a bundle on disk."""

    directory: Path
    manifest_path: Path
    heatmap_path: Path
    thumbs_dir: Path
    manifest: dict[str, Any]


def build_bundle(
    out_dir: str | Path,
    dataset: Dataset,
    reports: dict[str, ParseReport],
    windows: Sequence[HrWindow],
    frames: Sequence[AlignedFrame],
    episodes: Sequence[Episode],
    rgba: np.ndarray,
    spots: SpotIndex,
    projection: Projection,
    params: dict[str, Any],
) -> ReviewBundle:
    """Write manifest.json, heatmap.png, and thumbs/ into out_dir.

    Overwrites idempotently. Raises BundleError listing every referenced
    image file that is missing before anything is written.
    """
    out_dir = Path(out_dir)
    sharp = [img for img in dataset.images if img.sharp]
    missing = [img.path for img in sharp if not Path(img.path).is_file()]
    if missing:
        raise BundleError(
            "referenced image files are missing: " + ", ".join(sorted(missing))
        )
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BundleError(f"cannot create bundle directory {out_dir}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise BundleError(f"bundle directory {out_dir} is not writable")

    thumbs_dir = out_dir / "thumbs"
    thumbs_dir.mkdir(exist_ok=True)
    for img in sharp:
        write_thumbnail(img.path, thumbs_dir / f"{img.id}.jpg")

    heatmap_path = out_dir / "heatmap.png"
    Image.fromarray(np.ascontiguousarray(rgba), "RGBA").save(heatmap_path, format="PNG")

    manifest = build_manifest(
        dataset, reports, windows, frames, episodes, spots, projection, params
    )
    manifest_path = out_dir / "manifest.json"
    atomic_write(manifest_path, dump_manifest(manifest))
    return ReviewBundle(
        directory=out_dir,
        manifest_path=manifest_path,
        heatmap_path=heatmap_path,
        thumbs_dir=thumbs_dir,
        manifest=manifest,
    )


def load_manifest(path: str | Path) -> dict[str, Any]:
    """Read and version-gate a manifest document."""
    path = Path(path)
    try:
        manifest = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot read manifest {path}: {exc}") from exc
    version = manifest.get("version")
    if not isinstance(version, int) or version < 1:
        raise BundleError(f"manifest version must be a positive integer, got {version!r}")
    if version != MANIFEST_VERSION:
        raise BundleError(
            f"unsupported manifest version {version}; this reader understands {MANIFEST_VERSION}"
        )
    return manifest


def load_bundle(directory: str | Path) -> ReviewBundle:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    manifest = load_manifest(manifest_path)
    for rel in [manifest["heatmap"]] + [
        entry["thumb"] for entry in manifest["images"].values()
    ]:
        if not (directory / rel).is_file():
            raise BundleError(f"manifest references missing bundle file {rel}")
    return ReviewBundle(
        directory=directory,
        manifest_path=manifest_path,
        heatmap_path=directory / manifest["heatmap"],
        thumbs_dir=directory / "thumbs",
        manifest=manifest,
    )


def manifest_windows(manifest: dict[str, Any]) -> list[HrWindow]:
    return [
        HrWindow(w["start"], w["len"], w["mean_bpm"], w["n_samples"])
        for w in manifest["windows"]
    ]


def manifest_frames(manifest: dict[str, Any]) -> list[AlignedFrame]:
    return [
        AlignedFrame(f["image_id"], f["window_start"], f["mean_bpm"], f["t"])
        for f in manifest["frames"]
    ]


def manifest_episodes(manifest: dict[str, Any]) -> list[Episode]:
    return [
        Episode(
            start=e["start"],
            end=e["end"],
            window_starts=tuple(e["window_starts"]),
            peak_delta=e["peak_delta"],
            frames=tuple(e["frames"]),
            label=e["label"],
        )
        for e in manifest["episodes"]
    ]


def manifest_spots(manifest: dict[str, Any]) -> SpotIndex:
    spots = manifest["spots"]
    return SpotIndex(
        cell_px=spots["cell_px"],
        cells={
            _parse_cell_key(key): [
                SpotEntry(e["id"], e["lat"], e["lon"], e["t"]) for e in entries
            ]
            for key, entries in spots["cells"].items()
        },
    )


def manifest_projection(manifest: dict[str, Any]) -> Projection:
    p = manifest["projection"]
    return Projection(
        min_lat=p["min_lat"],
        min_lon=p["min_lon"],
        max_lat=p["max_lat"],
        max_lon=p["max_lon"],
        width=p["width"],
        height=p["height"],
        padding=p["padding"],
    )
