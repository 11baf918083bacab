"""HTTP surface over ServiceCore (stdlib threading server).

Endpoints:
  POST /api/events                 ingest an event batch
  GET  /api/scaffold               scaffold request (user, session, condition, elapsed_ms)
  POST /api/scaffold/interaction   popup / to-do list sub-action
  GET  /api/logs                   filtered log records (participant_id, keyword, kind, ...)
  GET  /api/export                 full dump (sessions, kind, format)
  GET  /api/config                 effective configuration document
Optionally serves a static asset bundle under /app/ when an asset directory
is configured.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from ..model import ValidationError
from .core import ServiceCore


class EngineHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, core: ServiceCore, assets_dir: str | None = None):
        self.core = core
        self.assets_dir = Path(assets_dir).resolve() if assets_dir else None
        super().__init__(address, _Handler)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: EngineHTTPServer

    def log_message(self, format, *args):  # quiet by default
        pass

    def _json(self, status: int, doc) -> None:
        body = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _text(self, status: int, text: str, content_type: str,
              headers: dict[str, str] | None = None) -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON body: {exc}")

    def do_POST(self) -> None:
        path = urlparse(self.path).path
        core = self.server.core
        try:
            if path == "/api/events":
                result = core.ingest(self._body())
                status = 429 if result.backpressure else 200
                self._json(status, result.to_wire())
            elif path == "/api/scaffold/interaction":
                todo = core.scaffold_interaction(self._body())
                self._json(200, {"todo_list": todo.to_wire() if todo else None})
            else:
                self._json(404, {"error": f"unknown endpoint {path}"})
        except ValidationError as exc:
            self._json(400, {"error": str(exc), "field": exc.field})
        except Exception as exc:  # pragma: no cover - defensive
            self._json(500, {"error": str(exc)})

    def do_GET(self) -> None:
        parsed = urlparse(self.path)
        path = parsed.path
        qs = {k: v[0] for k, v in parse_qs(parsed.query).items()}
        core = self.server.core
        try:
            if path == "/api/scaffold":
                response = core.scaffold_request(
                    user_id=qs.get("user", ""),
                    session_id=qs.get("session", ""),
                    condition=qs.get("condition", ""),
                    elapsed_ms=int(qs.get("elapsed_ms", 0)),
                )
                self._json(200, {"scaffold": response.to_wire() if response else None})
            elif path == "/api/logs":
                result = core.query_logs(
                    participant_id=qs.get("participant_id"),
                    keyword=qs.get("keyword"),
                    kind=qs.get("kind", "raw"),
                    limit=int(qs.get("limit", 100)),
                    cursor=qs.get("cursor"),
                )
                self._json(200, result)
            elif path == "/api/export":
                sessions = qs.get("sessions")
                artifact = core.export_logs(
                    session_ids=sessions.split(",") if sessions else None,
                    kind=qs.get("kind", "raw"),
                    fmt=qs.get("format", "jsonl"),
                )
                content_type = ("text/csv" if artifact.format == "csv"
                                else "application/x-ndjson")
                self._text(200, artifact.text, content_type, headers={
                    "X-Export-Count": str(artifact.count),
                    "X-Skipped-Sessions": ",".join(artifact.skipped),
                })
            elif path == "/api/config":
                self._json(200, core.config_document())
            elif path.startswith("/app") and self.server.assets_dir:
                self._serve_asset(path)
            else:
                self._json(404, {"error": f"unknown endpoint {path}"})
        except ValidationError as exc:
            self._json(400, {"error": str(exc), "field": exc.field})
        except Exception as exc:  # pragma: no cover - defensive
            self._json(500, {"error": str(exc)})

    def _serve_asset(self, path: str) -> None:
        rel = path[len("/app"):].lstrip("/") or "index.html"
        target = (self.server.assets_dir / rel).resolve()
        if not str(target).startswith(str(self.server.assets_dir)) or not target.is_file():
            self._json(404, {"error": "asset not found"})
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def serve(core: ServiceCore, host: str = "127.0.0.1", port: int = 8430,
          assets_dir: str | None = None, background: bool = False) -> EngineHTTPServer:
    """Start the HTTP server; background=True runs it on a daemon thread."""
    server = EngineHTTPServer((host, port), core, assets_dir)
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
    else:
        server.serve_forever()
    return server
