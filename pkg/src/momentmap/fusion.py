"""Time-base fusion of the three streams.

Aggregates 1 Hz heart rate into fixed windows matching the camera's capture
cadence, puts each sharp photo into the window containing it, and pairs
photos with GPS fixes by nearest timestamp.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

from .ingest import GpsFix, HeartRateSample, ImageRecord

DEFAULT_WINDOW_LEN = 30
DEFAULT_GPS_TOLERANCE = 15  # seconds; half the capture interval


@dataclass(frozen=True)
class HrWindow:
    start: int  # UTC epoch seconds, multiple of len
    len: int
    mean_bpm: float
    n_samples: int


@dataclass(frozen=True)
class AlignedFrame:
    image_id: str
    window_start: int
    mean_bpm: float
    t: int  # the image's own timestamp


@dataclass(frozen=True)
class GeoImage:
    image_id: str
    fix: GpsFix
    dt: int  # |image t − fix t| seconds
    t: int  # the image's own timestamp


def window_heart_rate(
    samples: list[HeartRateSample], window_len: int = DEFAULT_WINDOW_LEN
) -> list[HrWindow]:
    """Average samples into consecutive `window_len`-second windows.

    Windows sit on the lattice anchored at floor(first t / len)·len; empty
    windows are not emitted, partial ones are kept with their n_samples.
    """
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    windows: list[HrWindow] = []
    cur_start: int | None = None
    bpm_sum = 0
    n = 0
    for s in samples:
        start = (s.t // window_len) * window_len
        if start != cur_start:
            if cur_start is not None:
                windows.append(
                    HrWindow(cur_start, window_len, bpm_sum / n, n)
                )
            cur_start = start
            bpm_sum = 0
            n = 0
        bpm_sum += s.bpm
        n += 1
    if cur_start is not None:
        windows.append(HrWindow(cur_start, window_len, bpm_sum / n, n))
    return windows


def align_images_to_windows(
    images: list[ImageRecord], windows: list[HrWindow]
) -> list[AlignedFrame]:
    """Match each sharp image to the window whose [start, start+len) holds it.

    Images falling outside every emitted window are omitted.
    """
    if not windows:
        return []
    window_len = windows[0].len
    by_start = {w.start: w for w in windows}
    frames: list[AlignedFrame] = []
    for img in images:
        if not img.sharp:
            continue
        start = (img.t // window_len) * window_len
        w = by_start.get(start)
        if w is None:
            continue
        frames.append(
            AlignedFrame(
                image_id=img.id, window_start=w.start, mean_bpm=w.mean_bpm, t=img.t
            )
        )
    return frames


def align_gps_to_images(
    fixes: list[GpsFix],
    images: list[ImageRecord],
    tolerance: int = DEFAULT_GPS_TOLERANCE,
) -> list[GeoImage]:
    """Greedy nearest-in-time pairing of sharp images with GPS fixes.

    Candidate (image, fix) pairs within `tolerance` seconds are taken in
    order of ascending dt (ties to the earlier fix, then the earlier image)
    while both ends are still unmatched, so no fix or image is used twice.
    Result is sorted by image timestamp.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    sharp = [img for img in images if img.sharp]
    fix_times = [f.t for f in fixes]
    candidates: list[tuple[int, int, int]] = []  # (dt, fix idx, image idx)
    for i, img in enumerate(sharp):
        lo = bisect_left(fix_times, img.t - tolerance)
        hi = bisect_right(fix_times, img.t + tolerance)
        for j in range(lo, hi):
            candidates.append((abs(fix_times[j] - img.t), j, i))
    candidates.sort()
    taken_fix: set[int] = set()
    taken_img: set[int] = set()
    matched: list[tuple[int, GeoImage]] = []
    for dt, j, i in candidates:
        if j in taken_fix or i in taken_img:
            continue
        taken_fix.add(j)
        taken_img.add(i)
        matched.append(
            (sharp[i].t, GeoImage(image_id=sharp[i].id, fix=fixes[j], dt=dt, t=sharp[i].t))
        )
    matched.sort(key=lambda pair: pair[0])
    return [geo for _, geo in matched]


def windows_to_csv(windows: list[HrWindow]) -> str:
    """Debug serialization: `window_start,mean_bpm,n_samples` per line."""
    out = ["window_start,mean_bpm,n_samples"]
    out.extend(f"{w.start},{w.mean_bpm!r},{w.n_samples}" for w in windows)
    return "\n".join(out) + "\n"
