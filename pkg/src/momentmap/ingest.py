"""Parsers for wearable-device exports.

Turns the raw heart-rate CSV, GPS CSV, and timestamp-named image directory
into validated, UTC-normalized record streams. Every parser is a pure
function of its input bytes plus the dataset's timezone offset, and reports
how many rows it kept, dropped, and deduplicated.
"""

from __future__ import annotations

import csv
import io
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

BPM_MIN = 25
BPM_MAX = 250

# Laplacian-variance gate; scores at or above this mark a frame sharp.
DEFAULT_SHARPNESS_THRESHOLD = 100.0

# strptime pattern applied to the image filename stem (adapter point for
# other vendors' naming schemes).
DEFAULT_IMAGE_NAMING = "%Y%m%d_%H%M%S"

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png"}

_TIME_OF_DAY = re.compile(r"^\d{2}:\d{2}:\d{2}$")


class ParseError(ValueError):
    """Unrecoverable input problem, e.g. a malformed header row."""


@dataclass(frozen=True)
class HeartRateSample:
    t: int  # UTC epoch seconds
    bpm: int


@dataclass(frozen=True)
class GpsFix:
    t: int  # UTC epoch seconds
    lat: float
    lon: float


@dataclass(frozen=True)
class ImageRecord:
    id: str
    path: str
    t: int  # UTC epoch seconds
    blur_score: float
    sharp: bool


@dataclass
class ParseReport:
    """Row accounting for one parsed stream.

    `rejected` counts every dropped data row; `duplicates` is the subset of
    those that were dropped for repeating an already-seen timestamp, so
    rows_in = accepted + rejected always holds.
    """

    accepted: int = 0
    rejected: int = 0
    duplicates: int = 0

    def line(self) -> str:
        return (
            f"accepted={self.accepted} rejected={self.rejected}"
            f" duplicates={self.duplicates}"
        )


@dataclass
class Dataset:
    """All three streams of one recording, UTC-normalized and time-ordered."""

    hr: list[HeartRateSample]
    fixes: list[GpsFix]
    images: list[ImageRecord]
    tz_offset_applied: int


def parse_timestamp(text: str, tz_offset: int) -> int:
    """Epoch seconds (UTC) for a local-time string.

    Accepts `YYYY-MM-DDTHH:MM:SS` (T or space separator) or a bare
    `HH:MM:SS`, which is anchored to 1970-01-01. The device records local
    time; UTC = local − tz_offset.
    """
    text = text.strip()
    if _TIME_OF_DAY.match(text):
        text = "1970-01-01T" + text
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is not None:
        raise ValueError(f"expected naive local time, got offset-aware {text!r}")
    return int(dt.replace(tzinfo=timezone.utc).timestamp()) - tz_offset


def _format_timestamp(t: int) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S")


def _csv_rows(data: bytes | str, expected_header: list[str]) -> Iterator[list[str]]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rows = csv.reader(io.StringIO(data))
    try:
        header = next(rows)
    except StopIteration:
        raise ParseError(f"missing header row, expected {','.join(expected_header)}")
    if [h.strip().lower() for h in header] != expected_header:
        raise ParseError(
            f"malformed header {header!r}, expected {','.join(expected_header)}"
        )
    return rows


def parse_heart_rate_csv(
    data: bytes | str, tz_offset: int = 0
) -> tuple[list[HeartRateSample], ParseReport]:
    """Parse a `time,bpm` CSV into UTC heart-rate samples.

    Rows with unparseable fields, bpm outside [25, 250], or non-increasing
    timestamps are dropped and counted; an empty body is not an error.
    """
    report = ParseReport()
    samples: list[HeartRateSample] = []
    last_t: int | None = None
    for row in _csv_rows(data, ["time", "bpm"]):
        if not row:
            continue
        try:
            if len(row) != 2:
                raise ValueError("wrong column count")
            t = parse_timestamp(row[0], tz_offset)
            bpm = int(row[1])
        except ValueError:
            report.rejected += 1
            continue
        if not BPM_MIN <= bpm <= BPM_MAX:
            report.rejected += 1
            continue
        if last_t is not None and t <= last_t:
            report.rejected += 1
            if t == last_t:
                report.duplicates += 1
            continue
        samples.append(HeartRateSample(t=t, bpm=bpm))
        report.accepted += 1
        last_t = t
    return samples, report


def parse_gps_csv(
    data: bytes | str, tz_offset: int = 0
) -> tuple[list[GpsFix], ParseReport]:
    """Parse a `time,lat,lon` CSV into sorted, deduplicated UTC fixes.

    Out-of-bounds coordinates are dropped and counted; at duplicate
    timestamps the first row (in input order) wins.
    """
    report = ParseReport()
    raw: list[GpsFix] = []
    for row in _csv_rows(data, ["time", "lat", "lon"]):
        if not row:
            continue
        try:
            if len(row) != 3:
                raise ValueError("wrong column count")
            t = parse_timestamp(row[0], tz_offset)
            lat = float(row[1])
            lon = float(row[2])
        except ValueError:
            report.rejected += 1
            continue
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            report.rejected += 1
            continue
        raw.append(GpsFix(t=t, lat=lat, lon=lon))
    raw.sort(key=lambda f: f.t)  # stable: first occurrence stays first
    fixes: list[GpsFix] = []
    for fix in raw:
        if fixes and fix.t == fixes[-1].t:
            report.rejected += 1
            report.duplicates += 1
            continue
        fixes.append(fix)
        report.accepted += 1
    return fixes, report


def heart_rate_to_csv(samples: list[HeartRateSample]) -> str:
    """Serialize samples back to the canonical CSV (UTC, tz_offset 0)."""
    out = ["time,bpm"]
    out.extend(f"{_format_timestamp(s.t)},{s.bpm}" for s in samples)
    return "\n".join(out) + "\n"


def gps_to_csv(fixes: list[GpsFix]) -> str:
    """Serialize fixes back to the canonical CSV (UTC, tz_offset 0)."""
    out = ["time,lat,lon"]
    out.extend(f"{_format_timestamp(f.t)},{f.lat!r},{f.lon!r}" for f in fixes)
    return "\n".join(out) + "\n"


def blur_score(pixels: np.ndarray) -> float:
    """Variance of the 3×3 Laplacian response over a grayscale raster.

    Higher means sharper. The response is taken over the interior region
    where the kernel fully fits, so the score is invariant under mirroring.
    """
    a = np.asarray(pixels, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale raster, got shape {a.shape}")
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ValueError(f"raster {a.shape} smaller than the 3x3 kernel")
    lap = (
        a[:-2, 1:-1]
        + a[2:, 1:-1]
        + a[1:-1, :-2]
        + a[1:-1, 2:]
        - 4.0 * a[1:-1, 1:-1]
    )
    return float(lap.var())


def score_image_file(path: str | Path) -> float:
    """blur_score of an image file, decoded to 8-bit grayscale."""
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"), dtype=np.float64)
    return blur_score(gray)


def scan_images(
    directory: str | Path,
    tz_offset: int = 0,
    naming: str = DEFAULT_IMAGE_NAMING,
    sharpness_threshold: float = DEFAULT_SHARPNESS_THRESHOLD,
    workers: int = 1,
) -> tuple[list[ImageRecord], ParseReport]:
    """Scan a directory of timestamp-named images into ordered records.

    Filename stems are decoded with the strptime pattern `naming`; files
    that do not match, cannot be read, or repeat an already-seen id are
    skipped and counted. Scoring may run on `workers` threads; output order
    is by timestamp either way.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"image directory not found: {directory}")
    report = ParseReport()
    candidates: list[tuple[str, Path, int]] = []
    seen_ids: set[str] = set()
    for path in sorted(directory.iterdir()):
        if not path.is_file():
            continue
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            report.rejected += 1
            continue
        try:
            local = datetime.strptime(path.stem, naming)
        except ValueError:
            report.rejected += 1
            continue
        t = int(local.replace(tzinfo=timezone.utc).timestamp()) - tz_offset
        if path.stem in seen_ids:
            report.rejected += 1
            report.duplicates += 1
            continue
        seen_ids.add(path.stem)
        candidates.append((path.stem, path, t))

    def build(item: tuple[str, Path, int]) -> ImageRecord | None:
        image_id, path, t = item
        try:
            score = score_image_file(path)
        except (OSError, ValueError):
            return None
        return ImageRecord(
            id=image_id,
            path=str(path),
            t=t,
            blur_score=score,
            sharp=score >= sharpness_threshold,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(build, candidates))
    else:
        built = [build(c) for c in candidates]

    records = [r for r in built if r is not None]
    report.rejected += len(built) - len(records)
    report.accepted = len(records)
    records.sort(key=lambda r: (r.t, r.id))
    return records, report


def load_dataset(
    hr_path: str | Path | None,
    gps_path: str | Path | None,
    images_dir: str | Path | None,
    tz_offset: int = 0,
    naming: str = DEFAULT_IMAGE_NAMING,
    sharpness_threshold: float = DEFAULT_SHARPNESS_THRESHOLD,
    workers: int = 1,
) -> tuple[Dataset, dict[str, ParseReport]]:
    """Parse all provided exports into one Dataset plus per-stream reports."""
    hr: list[HeartRateSample] = []
    fixes: list[GpsFix] = []
    images: list[ImageRecord] = []
    reports: dict[str, ParseReport] = {}
    if hr_path is not None:
        hr, reports["hr"] = parse_heart_rate_csv(Path(hr_path).read_bytes(), tz_offset)
    if gps_path is not None:
        fixes, reports["gps"] = parse_gps_csv(Path(gps_path).read_bytes(), tz_offset)
    if images_dir is not None:
        images, reports["images"] = scan_images(
            images_dir,
            tz_offset,
            naming=naming,
            sharpness_threshold=sharpness_threshold,
            workers=workers,
        )
    return Dataset(hr=hr, fixes=fixes, images=images, tz_offset_applied=tz_offset), reports
