"""HTTP service over an immutable trained bundle.

Endpoints: POST /api/ask, GET /api/model, GET /healthz, plus static file
serving for the browser console.  The bundle never changes after startup,
so requests are served concurrently without locking.
"""

from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .models import ModelBundle
from .synthesis import RejectConfig, synthesize

log = logging.getLogger(__name__)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class QaServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, bundle: ModelBundle | None, console_dir: Path | None = None):
        super().__init__(address, QaRequestHandler)
        self.bundle = bundle
        self.console_dir = console_dir


class QaRequestHandler(BaseHTTPRequestHandler):
    server_version = "infoqa/0.1"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.debug("%s " + fmt, self.address_string(), *args)

    # -- helpers

    def _send(self, status: int, payload: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _send_json(self, status: int, data: dict) -> None:
        body = json.dumps(data, sort_keys=True, ensure_ascii=False).encode("utf-8")
        self._send(status, body, "application/json; charset=utf-8")

    def _send_error_json(self, status: int, message: str) -> None:
        self._send_json(status, {"error": message})

    # -- GET

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/healthz":
            self._send(200, b"ok", "text/plain; charset=utf-8")
            return
        if path == "/api/model":
            bundle = self.server.bundle
            if bundle is None:
                self._send_error_json(503, "model not loaded")
                return
            self._send_json(
                200,
                {
                    "format_version": 1,
                    "created_at": bundle.created_at,
                    "corpus_hash": bundle.corpus_hash,
                    "training_mode": bundle.training_mode,
                    "mlsu_count": len(bundle.mlsu_registry),
                    "models": bundle.model_stats(),
                },
            )
            return
        self._serve_static(path)

    def _serve_static(self, path: str) -> None:
        root = self.server.console_dir
        if root is None:
            self._send_error_json(404, "not found")
            return
        if path == "/":
            path = "/index.html"
        candidate = (root / path.lstrip("/")).resolve()
        if not str(candidate).startswith(str(root.resolve())) or not candidate.is_file():
            self._send_error_json(404, "not found")
            return
        content_type = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
        self._send(200, candidate.read_bytes(), content_type)

    # -- POST

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        if path != "/api/ask":
            self._send_error_json(404, "not found")
            return
        bundle = self.server.bundle
        if bundle is None:
            self._send_error_json(503, "model not loaded")
            return

        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            data = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self._send_error_json(400, "body must be a JSON object")
            return
        if not isinstance(data, dict) or not isinstance(data.get("question"), str):
            self._send_error_json(400, "body must carry a string 'question'")
            return
        question = data["question"]
        if not question.strip():
            self._send_error_json(422, "question is empty")
            return

        thresholds = None
        if "threshold" in data:
            try:
                thresholds = RejectConfig(
                    mlsu_min=float(data["threshold"]), max_steps=bundle.config.max_steps
                )
            except (TypeError, ValueError):
                self._send_error_json(400, "threshold must be a number")
                return

        trace = synthesize(bundle, question, thresholds)
        self._send_json(
            200,
            {
                "answer": None if trace.rejected else trace.final_answer,
                "rejected": trace.rejected,
                "reason": trace.reject_reason,
                "confidence": trace.mlsu_confidence,
                "trace": trace.to_dict(),
            },
        )


def serve(
    bundle: ModelBundle | None,
    port: int,
    bind: str = "127.0.0.1",
    console_dir: str | Path | None = None,
) -> QaServer:
    """Build the server; the caller decides when to serve_forever()."""
    root = Path(console_dir) if console_dir else None
    return QaServer((bind, port), bundle, root)
