"""momentmap: wearable lifelog fusion into reviewable moments and heat maps.

Pipeline: ingest device exports -> window heart rate and align streams by
timestamp -> extract special-moment episodes -> render the location
heat map -> package everything as a review bundle a browser viewer can
consume.
"""

from .bundle import (
    BundleError,
    ReviewBundle,
    build_bundle,
    build_manifest,
    load_bundle,
    load_manifest,
)
from .fusion import (
    AlignedFrame,
    GeoImage,
    HrWindow,
    align_gps_to_images,
    align_images_to_windows,
    window_heart_rate,
)
from .heatmap import (
    GrayBuffer,
    HeatmapParams,
    Projection,
    Ribbon,
    SpotIndex,
    accumulate,
    accumulate_points,
    build_spot_index,
    colorize,
    default_ribbon,
    fit_projection,
    render_heatmap,
)
from .ingest import (
    Dataset,
    GpsFix,
    HeartRateSample,
    ImageRecord,
    ParseError,
    ParseReport,
    blur_score,
    load_dataset,
    parse_gps_csv,
    parse_heart_rate_csv,
    scan_images,
)
from .moments import (
    Episode,
    MomentParams,
    attach_frames,
    detect_special_moments,
    label_episode,
    window_deltas,
)
from .server import serve_bundle

__version__ = "0.1.0"

__all__ = [
    "AlignedFrame",
    "BundleError",
    "Dataset",
    "Episode",
    "GeoImage",
    "GpsFix",
    "GrayBuffer",
    "HeartRateSample",
    "HeatmapParams",
    "HrWindow",
    "ImageRecord",
    "MomentParams",
    "ParseError",
    "ParseReport",
    "Projection",
    "ReviewBundle",
    "Ribbon",
    "SpotIndex",
    "accumulate",
    "accumulate_points",
    "align_gps_to_images",
    "align_images_to_windows",
    "attach_frames",
    "blur_score",
    "build_bundle",
    "build_manifest",
    "build_spot_index",
    "colorize",
    "default_ribbon",
    "detect_special_moments",
    "fit_projection",
    "label_episode",
    "load_bundle",
    "load_dataset",
    "load_manifest",
    "parse_gps_csv",
    "parse_heart_rate_csv",
    "render_heatmap",
    "scan_images",
    "serve_bundle",
    "window_deltas",
    "window_heart_rate",
]
