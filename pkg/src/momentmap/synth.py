"""Deterministic synthetic datasets with known ground truth.

Generates device-realistic exports (1 Hz heart-rate CSV, GPS CSV with indoor
dropout gaps, a directory of 30 s interval photos with a mix of sharp and
blurred frames) from a seed, plus the injection log of where heart-rate
spikes were planted. Everything is reproducible byte-for-byte from the seed,
which is what the regression checks rely on.
"""

from __future__ import annotations

import argparse
import math
import random
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from .fusion import HrWindow

DEFAULT_SEED = 20170402

BASE_LAT = 33.894
BASE_LON = 130.84

WINDOW_LEN = 30
BASE_BPM = 72.0
BASELINE_SIGMA = 3.0  # marginal std of window means, bpm
BASELINE_RHO = 0.8  # AR(1) smoothness of the window-mean process


@dataclass
class GroundTruth:
    """What the generator planted, for oracle-style assertions."""

    spike_window_starts: list[int] = field(default_factory=list)
    blurry_image_ids: list[str] = field(default_factory=list)
    n_images: int = 0
    n_hr_rows: int = 0
    n_gps_rows: int = 0


def synth_windows(
    n: int,
    n_spikes: int,
    seed: int = DEFAULT_SEED,
    spike_min: float = 20.0,
    spike_max: float = 32.0,
    start_t: int = 21600,
) -> tuple[list[HrWindow], list[int]]:
    """A window-mean stream: smooth sigma≈3 baseline plus injected spikes.

    Each spike raises two consecutive windows by at least `spike_min` bpm
    and returns to baseline. Spikes are spaced widely enough that default
    episode padding/merging cannot fuse them, so a perfect detector finds
    exactly one episode per spike. Returns (windows, spike window starts).
    """
    rng = random.Random(seed)
    innovation = BASELINE_SIGMA * math.sqrt(1.0 - BASELINE_RHO**2)
    level = 0.0
    means: list[float] = []
    for _ in range(n):
        level = BASELINE_RHO * level + rng.gauss(0.0, innovation)
        means.append(BASE_BPM + level)

    spike_starts: list[int] = []
    if n_spikes > 0:
        gap = n // n_spikes
        if gap < 16:
            raise ValueError(f"{n} windows is too short for {n_spikes} separated spikes")
        for k in range(n_spikes):
            i = k * gap + gap // 2
            magnitude = rng.uniform(spike_min, spike_max)
            means[i] += magnitude
            means[i + 1] += magnitude
            spike_starts.append(start_t + i * WINDOW_LEN)

    windows = [
        HrWindow(start_t + i * WINDOW_LEN, WINDOW_LEN, m, WINDOW_LEN)
        for i, m in enumerate(means)
    ]
    return windows, spike_starts


def _fmt_local(t: int) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S")


def _write_hr_csv(path: Path, day_starts: list[int], seconds_per_day: int,
                  rng: random.Random, truth: GroundTruth) -> None:
    """1 Hz bpm rows tracking a per-window target with small sample noise."""
    lines = ["time,bpm"]
    for day_start in day_starts:
        n_windows = seconds_per_day // WINDOW_LEN
        innovation = BASELINE_SIGMA * math.sqrt(1.0 - BASELINE_RHO**2)
        level = 0.0
        targets: list[float] = []
        for _ in range(n_windows):
            level = BASELINE_RHO * level + rng.gauss(0.0, innovation)
            targets.append(BASE_BPM + level)
        n_spikes = max(1, n_windows // 120)
        gap = n_windows // n_spikes
        for k in range(n_spikes):
            i = k * gap + gap // 2
            if i + 1 < n_windows:
                magnitude = rng.uniform(20.0, 32.0)
                targets[i] += magnitude
                targets[i + 1] += magnitude
                truth.spike_window_starts.append(day_start + i * WINDOW_LEN)
        for i, target in enumerate(targets):
            for s in range(WINDOW_LEN):
                t = day_start + i * WINDOW_LEN + s
                bpm = int(round(target + rng.gauss(0.0, 0.8)))
                bpm = max(40, min(190, bpm))
                lines.append(f"{_fmt_local(t)},{bpm}")
                truth.n_hr_rows += 1
    path.write_text("\n".join(lines) + "\n")


def _write_gps_csv(path: Path, day_starts: list[int], seconds_per_day: int,
                   rng: random.Random, truth: GroundTruth) -> None:
    """10 s fixes along a jittery walk, with indoor dropout stretches."""
    lines = ["time,lat,lon"]
    lat, lon = BASE_LAT, BASE_LON
    for day_start in day_starts:
        t = day_start
        outdoors = True
        next_flip = t + rng.randint(300, 1200)
        while t < day_start + seconds_per_day:
            if t >= next_flip:
                outdoors = not outdoors
                next_flip = t + rng.randint(300, 1200)
            if outdoors:
                lat += rng.gauss(0.0, 4e-5)
                lon += rng.gauss(0.0, 4e-5)
                lines.append(f"{_fmt_local(t)},{lat:.6f},{lon:.6f}")
                truth.n_gps_rows += 1
            t += 10
    path.write_text("\n".join(lines) + "\n")


def _sharp_pixels(rng: random.Random, width: int = 64, height: int = 48) -> np.ndarray:
    arr = np.asarray(
        [[rng.randrange(0, 256) for _ in range(width)] for _ in range(height)],
        dtype=np.uint8,
    )
    return arr


def _blurry_pixels(rng: random.Random, width: int = 64, height: int = 48) -> np.ndarray:
    base = rng.randrange(60, 200)
    col = np.linspace(0, 4, width)
    arr = (base + col)[None, :] * np.ones((height, 1))
    return arr.astype(np.uint8)


def _write_images(directory: Path, day_starts: list[int], seconds_per_day: int,
                  rng: random.Random, truth: GroundTruth,
                  blurry_fraction: float = 0.1) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for day_start in day_starts:
        for t in range(day_start, day_start + seconds_per_day, WINDOW_LEN):
            stamp = datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y%m%d_%H%M%S")
            blurry = rng.random() < blurry_fraction
            pixels = _blurry_pixels(rng) if blurry else _sharp_pixels(rng)
            Image.fromarray(pixels, "L").save(directory / f"{stamp}.jpg", quality=90)
            truth.n_images += 1
            if blurry:
                truth.blurry_image_ids.append(stamp)


def generate_dataset(
    out_dir: str | Path,
    seed: int = DEFAULT_SEED,
    days: int = 2,
    hours_per_day: float = 4.0,
) -> GroundTruth:
    """Write hr.csv, gps.csv, and images/ under out_dir; return ground truth.

    Day k starts at 06:00 UTC on successive dates from 2017-04-02, matching
    the exports' one-recording-per-day shape.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    first_day = int(
        datetime(2017, 4, 2, 6, 0, 0, tzinfo=timezone.utc).timestamp()
    )
    day_starts = [first_day + 86400 * k for k in range(days)]
    seconds_per_day = int(hours_per_day * 3600)
    seconds_per_day -= seconds_per_day % WINDOW_LEN

    truth = GroundTruth()
    _write_hr_csv(out_dir / "hr.csv", day_starts, seconds_per_day, rng, truth)
    _write_gps_csv(out_dir / "gps.csv", day_starts, seconds_per_day, rng, truth)
    _write_images(out_dir / "images", day_starts, seconds_per_day, rng, truth)
    return truth


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="momentmap-synth", description="Generate a synthetic lifelog dataset."
    )
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--days", type=int, default=2)
    parser.add_argument("--hours", type=float, default=4.0)
    args = parser.parse_args(argv)
    truth = generate_dataset(args.out_dir, seed=args.seed, days=args.days,
                             hours_per_day=args.hours)
    print(
        f"wrote {truth.n_hr_rows} hr rows, {truth.n_gps_rows} fixes, "
        f"{truth.n_images} images ({len(truth.blurry_image_ids)} blurred), "
        f"{len(truth.spike_window_starts)} injected spikes"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
