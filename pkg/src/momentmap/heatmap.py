"""Location-frequency heat map renderer.

GPS-matched images are projected through Web Mercator onto a raster; each
one stamps a radial integer kernel (255 at the center, 0 at the radius) into
an unclamped int64 accumulation buffer, so stamping is exactly additive:
buffer(A ∪ B) = buffer(A) + buffer(B) cellwise. Normalization and the
256-entry color ribbon are applied only at colorize time.

Stamp centers are quantized to the nearest pixel before distances are
measured. That keeps every (pixel, point) contribution an integer function
of integer offsets, which is what makes the additivity law exact and lets
large inputs take a histogram+FFT fast path that is bit-identical to direct
stamping (FFT error ~1e-6 is far below the 0.5 integer-rounding margin).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fusion import GeoImage
from .ingest import GpsFix

WEB_MERCATOR_MAX_LAT = 85.05112878

DEFAULT_RADIUS_PX = 16
DEFAULT_SPOT_CELL_PX = 8
DEFAULT_PADDING = 0.05

# Degenerate (single-point) extents are inflated to this span, ~100 m.
MIN_BBOX_SPAN_DEG = 0.001

# Points above this count switch accumulate() to the FFT fast path.
_FFT_THRESHOLD = 512


def _merc_x(lon: float) -> float:
    return (lon + 180.0) / 360.0


def _merc_y(lat: float) -> float:
    phi = math.radians(lat)
    return (1.0 - math.log(math.tan(math.pi / 4.0 + phi / 2.0)) / math.pi) / 2.0


def _inv_merc_x(x: float) -> float:
    return x * 360.0 - 180.0


def _inv_merc_y(y: float) -> float:
    return math.degrees(2.0 * math.atan(math.exp(math.pi * (1.0 - 2.0 * y))) - math.pi / 2.0)


@dataclass(frozen=True)
class Projection:
    """Auto-fit Web Mercator viewport mapping lat/lon onto a raster.

    y grows downward (raster convention), so max_lat maps to y=0.
    """

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float
    width: int
    height: int
    padding: float = DEFAULT_PADDING

    def _merc_bounds(self) -> tuple[float, float, float, float]:
        return (
            _merc_x(self.min_lon),
            _merc_x(self.max_lon),
            _merc_y(self.max_lat),  # north edge: smallest mercator y
            _merc_y(self.min_lat),
        )

    def project(self, lat: float, lon: float) -> tuple[float, float]:
        """Forward transform to real-valued pixel coordinates."""
        if not -WEB_MERCATOR_MAX_LAT < lat < WEB_MERCATOR_MAX_LAT:
            raise ValueError(f"latitude {lat} outside Web Mercator validity")
        x0, x1, y0, y1 = self._merc_bounds()
        x = (_merc_x(lon) - x0) / (x1 - x0) * self.width
        y = (_merc_y(lat) - y0) / (y1 - y0) * self.height
        return x, y

    def unproject(self, x: float, y: float) -> tuple[float, float]:
        """Inverse of project."""
        x0, x1, y0, y1 = self._merc_bounds()
        lon = _inv_merc_x(x0 + x / self.width * (x1 - x0))
        lat = _inv_merc_y(y0 + y / self.height * (y1 - y0))
        return lat, lon


def fit_projection(
    fixes: Sequence[GpsFix],
    width: int,
    height: int,
    padding: float = DEFAULT_PADDING,
) -> Projection:
    """Viewport covering all fixes, padded and aspect-corrected.

    padding is a fraction of the final raster: with padding=0.05 the extreme
    fixes sit 5% inside the long-axis edges. The short axis is expanded
    symmetrically to match width:height. A degenerate extent (all fixes at
    one point) is inflated to MIN_BBOX_SPAN_DEG first.
    """
    if not fixes:
        raise ValueError("cannot fit a projection to zero fixes")
    if width < 1 or height < 1:
        raise ValueError("raster dimensions must be positive")
    if not 0.0 <= padding < 0.5:
        raise ValueError(f"padding must be in [0, 0.5), got {padding}")
    usable = [f for f in fixes if -WEB_MERCATOR_MAX_LAT < f.lat < WEB_MERCATOR_MAX_LAT]
    if not usable:
        raise ValueError("no fixes within Web Mercator latitude validity")

    min_lat = min(f.lat for f in usable)
    max_lat = max(f.lat for f in usable)
    min_lon = min(f.lon for f in usable)
    max_lon = max(f.lon for f in usable)
    if max_lat - min_lat < MIN_BBOX_SPAN_DEG:
        center = (max_lat + min_lat) / 2.0
        min_lat = center - MIN_BBOX_SPAN_DEG / 2.0
        max_lat = center + MIN_BBOX_SPAN_DEG / 2.0
    if max_lon - min_lon < MIN_BBOX_SPAN_DEG:
        center = (max_lon + min_lon) / 2.0
        min_lon = center - MIN_BBOX_SPAN_DEG / 2.0
        max_lon = center + MIN_BBOX_SPAN_DEG / 2.0

    x0, x1 = _merc_x(min_lon), _merc_x(max_lon)
    y0, y1 = _merc_y(max_lat), _merc_y(min_lat)
    if padding > 0.0:
        mx = (x1 - x0) * padding / (1.0 - 2.0 * padding)
        my = (y1 - y0) * padding / (1.0 - 2.0 * padding)
        x0, x1 = x0 - mx, x1 + mx
        y0, y1 = y0 - my, y1 + my

    target = width / height
    span_x, span_y = x1 - x0, y1 - y0
    if span_x / span_y < target:
        grow = (span_y * target - span_x) / 2.0
        x0, x1 = x0 - grow, x1 + grow
    elif span_x / span_y > target:
        grow = (span_x / target - span_y) / 2.0
        y0, y1 = y0 - grow, y1 + grow

    return Projection(
        min_lat=_inv_merc_y(y1),
        min_lon=_inv_merc_x(x0),
        max_lat=_inv_merc_y(y0),
        max_lon=_inv_merc_x(x1),
        width=width,
        height=height,
        padding=padding,
    )


@dataclass(eq=False)
class GrayBuffer:
    """Unclamped additive accumulation raster (int64 cells, y-down)."""

    width: int
    height: int
    cells: np.ndarray

    @classmethod
    def zeros(cls, width: int, height: int) -> GrayBuffer:
        return cls(width, height, np.zeros((height, width), dtype=np.int64))

    def same_cells(self, other: GrayBuffer) -> bool:
        return bool(np.array_equal(self.cells, other.cells))


def kernel_stamp(radius_px: int, kernel: str = "linear") -> np.ndarray:
    """Integer (2r+1)² stamp table: round(255·falloff(d/r)) per offset.

    `linear` falls off as 1−d/r; `cosine` as (1+cos(πd/r))/2. Both are 255
    at the center and 0 at and beyond the radius.
    """
    if radius_px < 1:
        raise ValueError(f"radius_px must be >= 1, got {radius_px}")
    off = np.arange(-radius_px, radius_px + 1, dtype=np.float64)
    d = np.hypot(off[:, None], off[None, :])
    q = d / radius_px
    if kernel == "linear":
        vals = 255.0 * np.maximum(0.0, 1.0 - q)
    elif kernel == "cosine":
        vals = 255.0 * 0.5 * (1.0 + np.cos(math.pi * np.minimum(q, 1.0)))
        vals[q >= 1.0] = 0.0
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return np.floor(vals + 0.5).astype(np.int64)


def _snap_centers(centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sx = np.floor(centers[:, 0] + 0.5).astype(np.int64)
    sy = np.floor(centers[:, 1] + 0.5).astype(np.int64)
    return sx, sy


def _accumulate_direct(
    width: int, height: int, centers: np.ndarray, stamp: np.ndarray, radius_px: int
) -> np.ndarray:
    r = radius_px
    buf = np.zeros((height, width), dtype=np.int64)
    sx, sy = _snap_centers(centers)
    for cx, cy in zip(sx, sy):
        x0, x1 = max(0, cx - r), min(width, cx + r + 1)
        y0, y1 = max(0, cy - r), min(height, cy + r + 1)
        if x0 >= x1 or y0 >= y1:
            continue
        buf[y0:y1, x0:x1] += stamp[y0 - cy + r : y1 - cy + r, x0 - cx + r : x1 - cx + r]
    return buf


def _next_fast_len(n: int) -> int:
    # smallest 5-smooth integer >= n keeps numpy's FFT off slow prime sizes
    best = 1
    while best < n:
        best *= 2
    p5 = 1
    while p5 < best:
        p3 = p5
        while p3 < best:
            x = p3
            while x < n:
                x *= 2
            best = min(best, x)
            p3 *= 3
        p5 *= 5
    return best


def _accumulate_fft(
    width: int, height: int, centers: np.ndarray, stamp: np.ndarray, radius_px: int
) -> np.ndarray:
    r = radius_px
    ph, pw = height + 2 * r, width + 2 * r
    sx, sy = _snap_centers(centers)
    sx, sy = sx + r, sy + r
    keep = (sx >= 0) & (sx < pw) & (sy >= 0) & (sy < ph)
    sx, sy = sx[keep], sy[keep]
    hist = np.bincount(sy * pw + sx, minlength=ph * pw).reshape(ph, pw)
    fh = _next_fast_len(ph + 2 * r)
    fw = _next_fast_len(pw + 2 * r)
    spec = np.fft.rfft2(hist, s=(fh, fw)) * np.fft.rfft2(stamp, s=(fh, fw))
    conv = np.fft.irfft2(spec, s=(fh, fw))
    out = conv[2 * r : 2 * r + height, 2 * r : 2 * r + width]
    return np.rint(out).astype(np.int64)


def accumulate_points(
    width: int,
    height: int,
    centers: np.ndarray | Sequence[tuple[float, float]],
    radius_px: int = DEFAULT_RADIUS_PX,
    kernel: str = "linear",
    workers: int = 1,
    method: str = "auto",
) -> GrayBuffer:
    """Stamp one radial kernel per (x, y) pixel center into a fresh buffer.

    Points off the raster contribute whatever part of their stamp lands on
    it. `method` picks the direct loop or the FFT path ("auto" switches on
    input size); both produce identical cells. With workers > 1 the direct
    path partitions the points and sums partial buffers, which is exact
    because stamping is additive; the FFT path is a single pass, so worker
    count never changes the result.
    """
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    stamp = kernel_stamp(radius_px, kernel)
    if method == "auto":
        method = "fft" if len(centers) > _FFT_THRESHOLD else "direct"
    if method == "direct":
        if workers > 1 and len(centers) > 1:
            parts = np.array_split(centers, workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                partials = list(
                    pool.map(
                        lambda part: _accumulate_direct(
                            width, height, part, stamp, radius_px
                        ),
                        parts,
                    )
                )
            cells = partials[0]
            for partial in partials[1:]:
                cells = cells + partial
        else:
            cells = _accumulate_direct(width, height, centers, stamp, radius_px)
    elif method == "fft":
        cells = _accumulate_fft(width, height, centers, stamp, radius_px)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GrayBuffer(width, height, cells)


def accumulate(
    projection: Projection,
    points: Sequence[GeoImage],
    radius_px: int = DEFAULT_RADIUS_PX,
    kernel: str = "linear",
    workers: int = 1,
    method: str = "auto",
) -> GrayBuffer:
    """Project each GPS-matched image and stamp its kernel into a buffer."""
    centers = [projection.project(g.fix.lat, g.fix.lon) for g in points]
    return accumulate_points(
        projection.width,
        projection.height,
        centers,
        radius_px=radius_px,
        kernel=kernel,
        workers=workers,
        method=method,
    )


@dataclass(eq=False)
class Ribbon:
    """256-entry RGBA colormap; index 0 transparent, alpha non-decreasing."""

    table: np.ndarray  # (256, 4) uint8

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=np.uint8)
        if t.shape != (256, 4):
            raise ValueError(f"ribbon table must be (256, 4), got {t.shape}")
        if t[0, 3] != 0:
            raise ValueError("ribbon entry 0 must be fully transparent")
        if np.any(np.diff(t[:, 3].astype(np.int64)) < 0):
            raise ValueError("ribbon alpha must be non-decreasing")
        self.table = t


def default_ribbon() -> Ribbon:
    """Rainbow ribbon: hue 240°→0° (blue→red) at full saturation/value,
    alpha ramping 0→200 over indices 0→64 and constant 200 after."""
    import colorsys

    table = np.zeros((256, 4), dtype=np.uint8)
    for i in range(256):
        hue = 240.0 * (1.0 - i / 255.0) / 360.0
        r, g, b = colorsys.hsv_to_rgb(hue, 1.0, 1.0)
        alpha = min(200, math.floor(200.0 * i / 64.0 + 0.5))
        table[i] = (
            math.floor(r * 255.0 + 0.5),
            math.floor(g * 255.0 + 0.5),
            math.floor(b * 255.0 + 0.5),
            alpha,
        )
    return Ribbon(table)


def ribbon_to_csv(ribbon: Ribbon) -> str:
    """Pin the exact table for regression: `index,r,g,b,a` per line."""
    out = ["index,r,g,b,a"]
    out.extend(
        f"{i},{r},{g},{b},{a}" for i, (r, g, b, a) in enumerate(ribbon.table.tolist())
    )
    return "\n".join(out) + "\n"


def colorize(
    buf: GrayBuffer, ribbon: Ribbon | None = None, norm: float | str = "max"
) -> np.ndarray:
    """Map accumulated cells through the ribbon into an RGBA raster.

    Under "max" normalization, index = clamp(round(255·cell/max_cell)); an
    all-zero buffer maps wholly to index 0. Passing a number for `norm`
    fixes max_cell instead, for comparable scales across renders.
    """
    ribbon = ribbon or default_ribbon()
    cells = buf.cells
    if norm == "max":
        max_cell = int(cells.max()) if cells.size else 0
    elif isinstance(norm, (int, float)) and not isinstance(norm, bool):
        max_cell = float(norm)
        if max_cell <= 0:
            raise ValueError(f"fixed norm must be positive, got {norm}")
    else:
        raise ValueError(f"unknown normalization {norm!r}")
    if max_cell == 0:
        idx = np.zeros(cells.shape, dtype=np.uint8)
    else:
        scaled = 255.0 * cells.astype(np.float64)
        scaled /= max_cell
        idx = np.clip(np.floor(scaled + 0.5), 0.0, 255.0).astype(np.uint8)
    return ribbon.table[idx]


@dataclass(frozen=True)
class SpotEntry:
    image_id: str
    lat: float
    lon: float
    t: int


@dataclass
class SpotIndex:
    """Quantized pixel-grid lookup from heat-map location to images."""

    cell_px: int
    cells: dict[tuple[int, int], list[SpotEntry]]

    def lookup(self, cell: tuple[int, int]) -> list[SpotEntry]:
        return self.cells.get(cell, [])


def build_spot_index(
    projection: Projection,
    geos: Sequence[GeoImage],
    spot_cell_px: int = DEFAULT_SPOT_CELL_PX,
) -> SpotIndex:
    """Assign every GPS-matched image to its `spot_cell_px` pixel cell.

    Cells use the same snapped pixel centers as accumulate, so click targets
    line up with the stamped blobs. Entries are time-ordered per cell.
    """
    if spot_cell_px < 1:
        raise ValueError(f"spot_cell_px must be >= 1, got {spot_cell_px}")
    cells: dict[tuple[int, int], list[tuple[int, str, SpotEntry]]] = {}
    for g in geos:
        x, y = projection.project(g.fix.lat, g.fix.lon)
        sx = math.floor(x + 0.5)
        sy = math.floor(y + 0.5)
        key = (sx // spot_cell_px, sy // spot_cell_px)
        entry = SpotEntry(image_id=g.image_id, lat=g.fix.lat, lon=g.fix.lon, t=g.t)
        cells.setdefault(key, []).append((entry.t, entry.image_id, entry))
    return SpotIndex(
        cell_px=spot_cell_px,
        cells={
            key: [e for _, _, e in sorted(items)] for key, items in sorted(cells.items())
        },
    )


@dataclass(frozen=True)
class HeatmapParams:
    width: int = 1024
    height: int = 1024
    padding: float = DEFAULT_PADDING
    radius_px: int = DEFAULT_RADIUS_PX
    kernel: str = "linear"
    spot_cell_px: int = DEFAULT_SPOT_CELL_PX
    norm: float | str = "max"


def render_heatmap(
    geos: Sequence[GeoImage],
    params: HeatmapParams | None = None,
    ribbon: Ribbon | None = None,
    workers: int = 1,
) -> tuple[np.ndarray, SpotIndex, Projection]:
    """Full render: fit viewport, accumulate, colorize, index spots.

    Deterministic end-to-end: the same matched images produce byte-identical
    rasters regardless of worker count.
    """
    params = params or HeatmapParams()
    usable = [
        g for g in geos if -WEB_MERCATOR_MAX_LAT < g.fix.lat < WEB_MERCATOR_MAX_LAT
    ]
    if not usable:
        raise ValueError(
            "no GPS-matched images to render; GPS coverage commonly has gaps "
            "indoors, so check the match tolerance and fix stream"
        )
    projection = fit_projection(
        [g.fix for g in usable], params.width, params.height, params.padding
    )
    buf = accumulate(
        projection, usable, radius_px=params.radius_px, kernel=params.kernel, workers=workers
    )
    rgba = colorize(buf, ribbon=ribbon, norm=params.norm)
    spots = build_spot_index(projection, usable, params.spot_cell_px)
    return rgba, spots, projection
