"""Command-line pipeline: ingest, fuse, moments, heatmap, bundle, serve.

Exit codes: 0 success, 1 input error (bad flags, unreadable or malformed
inputs), 2 internal error. Parse reports go to stderr as
`<stream>: accepted=N rejected=M duplicates=K`; `--report json` prints a
machine-readable run summary to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Any

from . import bundle as bundle_mod
from . import fusion, heatmap, ingest, moments
from .server import serve_bundle


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        width, height = int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--size must be WxH, got {text!r}")
    if width < 1 or height < 1:
        raise argparse.ArgumentTypeError(f"--size must be positive, got {text!r}")
    return width, height


def _add_input_flags(p: argparse.ArgumentParser, require_hr: bool = False,
                     require_gps: bool = False, require_images: bool = False) -> None:
    p.add_argument("--hr", required=require_hr, help="heart-rate CSV (time,bpm)")
    p.add_argument("--gps", required=require_gps, help="GPS CSV (time,lat,lon)")
    p.add_argument("--images", required=require_images,
                   help="directory of timestamp-named images")
    p.add_argument("--tz-offset", type=int, default=0,
                   help="device-local offset from UTC in seconds (UTC = local - offset)")
    p.add_argument("--naming", default=ingest.DEFAULT_IMAGE_NAMING,
                   help="strptime pattern for image filename stems")
    p.add_argument("--sharpness-threshold", type=float,
                   default=ingest.DEFAULT_SHARPNESS_THRESHOLD,
                   help="blur_score at or above this marks a frame sharp")
    p.add_argument("--workers", type=int, default=1,
                   help="threads for image scoring and heat-map accumulation")
    p.add_argument("--report", choices=["json"], default=None,
                   help="print a run summary as JSON to stdout")


def _add_fusion_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--window-len", type=int, default=fusion.DEFAULT_WINDOW_LEN,
                   help="heart-rate window length in seconds")
    p.add_argument("--gps-tolerance", type=int, default=fusion.DEFAULT_GPS_TOLERANCE,
                   help="max |image t - fix t| for a GPS match, seconds")


def _add_moment_flags(p: argparse.ArgumentParser) -> None:
    d = moments.MomentParams()
    p.add_argument("--abs-delta", type=float, default=d.abs_delta)
    p.add_argument("--z-threshold", type=float, default=d.z_threshold)
    p.add_argument("--baseline-len", type=int, default=d.baseline_len)
    p.add_argument("--merge-gap", type=int, default=d.merge_gap)
    p.add_argument("--context-pad", type=int, default=d.context_pad)


def _add_heatmap_flags(p: argparse.ArgumentParser) -> None:
    d = heatmap.HeatmapParams()
    p.add_argument("--radius-px", type=int, default=d.radius_px)
    p.add_argument("--size", type=_parse_size, default=(d.width, d.height),
                   metavar="WxH")
    p.add_argument("--padding", type=float, default=d.padding)
    p.add_argument("--kernel", choices=["linear", "cosine"], default=d.kernel)
    p.add_argument("--spot-cell-px", type=int, default=d.spot_cell_px)


def _load(args: argparse.Namespace) -> tuple[ingest.Dataset, dict[str, ingest.ParseReport]]:
    dataset, reports = ingest.load_dataset(
        args.hr, args.gps, args.images,
        tz_offset=args.tz_offset,
        naming=args.naming,
        sharpness_threshold=args.sharpness_threshold,
        workers=args.workers,
    )
    for name, report in reports.items():
        print(f"{name}: {report.line()}", file=sys.stderr)
    return dataset, reports


def _summary(reports: dict[str, ingest.ParseReport], **extra: Any) -> dict[str, Any]:
    out: dict[str, Any] = {
        "reports": {
            name: {"accepted": r.accepted, "rejected": r.rejected,
                   "duplicates": r.duplicates}
            for name, r in reports.items()
        }
    }
    out.update(extra)
    return out


def _emit(args: argparse.Namespace, summary: dict[str, Any]) -> None:
    if args.report == "json":
        print(json.dumps(summary, sort_keys=True, indent=2))


def cmd_ingest(args: argparse.Namespace) -> int:
    if not (args.hr or args.gps or args.images):
        print("nothing to ingest: pass --hr, --gps, and/or --images", file=sys.stderr)
        return 1
    dataset, reports = _load(args)
    _emit(args, _summary(
        reports,
        counts={"hr": len(dataset.hr), "gps": len(dataset.fixes),
                "images": len(dataset.images),
                "sharp_images": sum(1 for i in dataset.images if i.sharp)},
    ))
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    dataset, reports = _load(args)
    windows = fusion.window_heart_rate(dataset.hr, args.window_len)
    frames = fusion.align_images_to_windows(dataset.images, windows)
    geos = fusion.align_gps_to_images(dataset.fixes, dataset.images, args.gps_tolerance)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "windows.csv").write_text(fusion.windows_to_csv(windows))
    sharp = sum(1 for i in dataset.images if i.sharp)
    print(f"fuse: windows={len(windows)} frames={len(frames)} "
          f"gps_matched={len(geos)} unmatched_sharp={sharp - len(geos)}",
          file=sys.stderr)
    _emit(args, _summary(reports, windows=len(windows), frames=len(frames),
                         gps_matched=len(geos)))
    return 0


def cmd_moments(args: argparse.Namespace) -> int:
    dataset, reports = _load(args)
    windows = fusion.window_heart_rate(dataset.hr, args.window_len)
    frames = fusion.align_images_to_windows(dataset.images, windows)
    params = moments.MomentParams(
        abs_delta=args.abs_delta, z_threshold=args.z_threshold,
        baseline_len=args.baseline_len, merge_gap=args.merge_gap,
        context_pad=args.context_pad,
    )
    episodes = moments.attach_frames(
        moments.detect_special_moments(windows, params), frames
    )
    csv_text = moments.episodes_to_csv(episodes)
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        print(csv_text, end="")
    print(f"moments: episodes={len(episodes)}", file=sys.stderr)
    _emit(args, _summary(reports, episodes=len(episodes)))
    return 0


def cmd_heatmap(args: argparse.Namespace) -> int:
    from PIL import Image

    dataset, reports = _load(args)
    geos = fusion.align_gps_to_images(dataset.fixes, dataset.images, args.gps_tolerance)
    params = _heatmap_params(args)
    rgba, spots, _ = heatmap.render_heatmap(geos, params, workers=args.workers)
    out = Path(args.out or "heatmap.png")
    Image.fromarray(rgba, "RGBA").save(out, format="PNG")
    print(f"heatmap: {out} spots={len(spots.cells)}", file=sys.stderr)
    _emit(args, _summary(reports, gps_matched=len(geos), spot_cells=len(spots.cells)))
    return 0


def _heatmap_params(args: argparse.Namespace) -> heatmap.HeatmapParams:
    width, height = args.size
    return heatmap.HeatmapParams(
        width=width, height=height, padding=args.padding,
        radius_px=args.radius_px, kernel=args.kernel,
        spot_cell_px=args.spot_cell_px,
    )


def cmd_bundle(args: argparse.Namespace) -> int:
    dataset, reports = _load(args)
    windows = fusion.window_heart_rate(dataset.hr, args.window_len)
    frames = fusion.align_images_to_windows(dataset.images, windows)
    geos = fusion.align_gps_to_images(dataset.fixes, dataset.images, args.gps_tolerance)
    moment_params = moments.MomentParams(
        abs_delta=args.abs_delta, z_threshold=args.z_threshold,
        baseline_len=args.baseline_len, merge_gap=args.merge_gap,
        context_pad=args.context_pad,
    )
    episodes = moments.attach_frames(
        moments.detect_special_moments(windows, moment_params), frames
    )
    hm_params = _heatmap_params(args)
    rgba, spots, projection = heatmap.render_heatmap(geos, hm_params, workers=args.workers)
    params_used = {
        "tz_offset": args.tz_offset,
        "naming": args.naming,
        "sharpness_threshold": args.sharpness_threshold,
        "window_len": args.window_len,
        "gps_tolerance": args.gps_tolerance,
        "abs_delta": moment_params.abs_delta,
        "z_threshold": moment_params.z_threshold,
        "baseline_len": moment_params.baseline_len,
        "merge_gap": moment_params.merge_gap,
        "context_pad": moment_params.context_pad,
        "width": hm_params.width,
        "height": hm_params.height,
        "padding": hm_params.padding,
        "radius_px": hm_params.radius_px,
        "kernel": hm_params.kernel,
        "spot_cell_px": hm_params.spot_cell_px,
    }
    result = bundle_mod.build_bundle(
        args.out, dataset, reports, windows, frames, episodes,
        rgba, spots, projection, params_used,
    )
    print(f"bundle: {result.directory}", file=sys.stderr)
    _emit(args, _summary(
        reports, windows=len(windows), frames=len(frames),
        gps_matched=len(geos), episodes=len(episodes),
        bundle=str(result.directory),
    ))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    server = serve_bundle(args.bundle, args.addr, ui_dir=args.ui)
    host, port = server.server_address[:2]
    print(f"serving {args.bundle} on http://{host}:{port}/", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="momentmap",
                     description="Lifelog review: special moments + location heat map.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse and validate device exports")
    _add_input_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fuse", help="window heart rate and align images/GPS")
    _add_input_flags(p, require_hr=True)
    _add_fusion_flags(p)
    p.add_argument("--out", help="directory for intermediate CSVs")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("moments", help="extract special-moment episodes")
    _add_input_flags(p, require_hr=True)
    _add_fusion_flags(p)
    _add_moment_flags(p)
    p.add_argument("--out", help="episodes CSV path (default: stdout)")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("heatmap", help="render the location-frequency heat map")
    _add_input_flags(p, require_gps=True, require_images=True)
    _add_fusion_flags(p)
    _add_heatmap_flags(p)
    p.add_argument("--out", help="output PNG path (default: heatmap.png)")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("bundle", help="run the full pipeline into a review bundle")
    _add_input_flags(p, require_hr=True, require_gps=True, require_images=True)
    _add_fusion_flags(p)
    _add_moment_flags(p)
    _add_heatmap_flags(p)
    p.add_argument("--out", required=True, help="bundle output directory")
    p.set_defaults(func=cmd_bundle)

    p = sub.add_parser("serve", help="serve a bundle to the viewer")
    p.add_argument("--bundle", required=True, help="bundle directory")
    p.add_argument("--addr", default="127.0.0.1:8000", help="host:port to bind")
    p.add_argument("--ui", default=None, help="static viewer directory to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, -h exits 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ingest.ParseError, bundle_mod.BundleError, FileNotFoundError,
            NotADirectoryError, ValueError) as exc:
        print(f"momentmap: error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
