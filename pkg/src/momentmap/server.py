"""HTTP serving for a review bundle.

Small stdlib server: static GETs for the manifest, heat map, thumbnails,
and original photos, plus one mutating endpoint — PATCH
/episodes/{index}/label — whose manifest rewrite is serialized through a
lock and lands atomically (temp file + rename), so concurrent label edits
cannot corrupt or lose each other.
"""

from __future__ import annotations

import json
import re
import threading
from functools import partial
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .bundle import BundleError, atomic_write, dump_manifest, load_bundle, load_manifest

_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_LABEL_RE = re.compile(r"^/episodes/(\d+)/label$")

_CONTENT_TYPES = {
    ".json": "application/json",
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript",
    ".css": "text/css",
    ".svg": "image/svg+xml",
    ".map": "application/json",
}


class BundleRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def __init__(self, *args, bundle_dir: Path, lock: threading.Lock,
                 ui_dir: Path | None, quiet: bool, **kwargs):
        self.bundle_dir = bundle_dir
        self.lock = lock
        self.ui_dir = ui_dir
        self.quiet = quiet
        super().__init__(*args, **kwargs)

    def log_message(self, format: str, *args) -> None:
        if not self.quiet:
            super().log_message(format, *args)

    # -- helpers ---------------------------------------------------------

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict) -> None:
        self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

    def _send_error(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    def _send_file(self, path: Path) -> None:
        if not path.is_file():
            self._send_error(404, f"not found: {self.path}")
            return
        ctype = _CONTENT_TYPES.get(path.suffix.lower(), "application/octet-stream")
        self._send(200, path.read_bytes(), ctype)

    # -- routes ----------------------------------------------------------

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/manifest.json":
            self._send_file(self.bundle_dir / "manifest.json")
        elif path == "/heatmap.png":
            self._send_file(self.bundle_dir / "heatmap.png")
        elif path.startswith("/thumbs/"):
            name = path[len("/thumbs/"):]
            if not name.endswith(".jpg") or not _ID_RE.match(name[:-4]):
                self._send_error(404, f"not found: {path}")
                return
            self._send_file(self.bundle_dir / "thumbs" / name)
        elif path.startswith("/images/"):
            self._serve_original(path[len("/images/"):])
        elif self.ui_dir is not None:
            rel = "index.html" if path == "/" else path.lstrip("/")
            target = (self.ui_dir / rel).resolve()
            if not str(target).startswith(str(self.ui_dir.resolve())):
                self._send_error(404, f"not found: {path}")
                return
            self._send_file(target)
        else:
            self._send_error(404, f"not found: {path}")

    def _serve_original(self, image_id: str) -> None:
        if not _ID_RE.match(image_id):
            self._send_error(404, f"unknown image id {image_id!r}")
            return
        manifest = load_manifest(self.bundle_dir / "manifest.json")
        entry = manifest["images"].get(image_id)
        if entry is None:
            self._send_error(404, f"unknown image id {image_id!r}")
            return
        self._send_file(Path(entry["source"]))

    def do_PATCH(self) -> None:
        match = _LABEL_RE.match(self.path)
        if not match:
            self._send_error(404, f"not found: {self.path}")
            return
        index = int(match.group(1))
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length))
        except (ValueError, json.JSONDecodeError):
            self._send_error(400, "body must be JSON")
            return
        if not isinstance(payload, dict) or not isinstance(payload.get("label"), str):
            self._send_error(400, 'body must be {"label": <text>}')
            return
        manifest_path = self.bundle_dir / "manifest.json"
        with self.lock:
            manifest = load_manifest(manifest_path)
            episodes = manifest["episodes"]
            if index >= len(episodes):
                self._send_error(404, f"no episode {index}")
                return
            episodes[index]["label"] = payload["label"]
            atomic_write(manifest_path, dump_manifest(manifest))
            updated = episodes[index]
        self._send_json(200, {"ok": True, "index": index, "episode": updated})

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, PATCH, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()


def serve_bundle(
    bundle_dir: str | Path,
    address: str = "127.0.0.1:8000",
    ui_dir: str | Path | None = None,
    quiet: bool = False,
) -> ThreadingHTTPServer:
    """Build a server for a valid bundle; caller runs serve_forever().

    Binding to port 0 picks a free port (see server.server_address).
    """
    bundle_dir = Path(bundle_dir)
    load_bundle(bundle_dir)  # validates manifest + referenced files
    host, _, port_text = address.partition(":")
    if not host or not port_text.isdigit():
        raise BundleError(f"address must be host:port, got {address!r}")
    handler = partial(
        BundleRequestHandler,
        bundle_dir=bundle_dir,
        lock=threading.Lock(),
        ui_dir=Path(ui_dir) if ui_dir is not None else None,
        quiet=quiet,
    )
    return ThreadingHTTPServer((host, int(port_text)), handler)
