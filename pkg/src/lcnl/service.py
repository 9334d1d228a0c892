"""HTTP JSON API over a loaded grammar pack.

Endpoints:
    GET  /v1/health     -> {"status": "ok"}
    GET  /v1/languages  -> {"languages": [...]}
    POST /v1/translate  body {"text", "from", "to", "k"?}
    POST /v1/parse      body {"text", "language", "k"?}

All responses are UTF-8 JSON; errors use {"error": message} with 400
for bad requests and 413 for oversized input.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .core import serialize_tree
from .packs import GrammarPack
from .translate import NoParse, TranslateError, Translator

MAX_TEXT_CHARS = 10000


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class _App:
    """Request-independent state: one immutable translator, shared."""

    def __init__(self, pack: GrammarPack):
        self.pack = pack
        self.translator = Translator(pack.grammar)

    def languages(self) -> str:
        return json.dumps({"languages": self.translator.languages}, separators=(",", ":"))

    def translate(self, body: dict) -> str:
        text = _field(body, "text")
        src = _field(body, "from")
        tgt = _field(body, "to")
        k = _optional_k(body)
        try:
            result = self.translator.translate(text, src, tgt, k=k)
        except NoParse as exc:
            raise ApiError(400, str(exc)) from exc
        except TranslateError as exc:
            raise ApiError(400, str(exc)) from exc
        return result.to_json()

    def parse(self, body: dict) -> str:
        text = _field(body, "text")
        language = _field(body, "language")
        k = _optional_k(body)
        try:
            result = self.translator.parse_text(text, language, k=k)
        except TranslateError as exc:
            raise ApiError(400, str(exc)) from exc
        trees = [
            {"tree": serialize_tree(tree), "cost": cost}
            for tree, cost in result.trees
        ]
        return json.dumps(
            {"text": text, "language": language, "trees": trees},
            ensure_ascii=False,
            separators=(",", ":"),
        )


def _field(body: dict, key: str) -> str:
    value = body.get(key)
    if not isinstance(value, str):
        raise ApiError(400, f"missing or non-string field {key!r}")
    if key == "text" and len(value) > MAX_TEXT_CHARS:
        raise ApiError(413, f"text exceeds {MAX_TEXT_CHARS} characters")
    return value

def _optional_k(body: dict) -> int:
    k = body.get("k", 5)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ApiError(400, "k must be a positive integer")
    return min(k, 100)


class _Handler(BaseHTTPRequestHandler):
    app: _App  # set by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, payload: str) -> None:
        data = payload.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, message: str) -> None:
        self._send(status, json.dumps({"error": message}, ensure_ascii=False))

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, '{"status":"ok"}')
        elif self.path == "/v1/languages":
            self._send(200, self.app.languages())
        else:
            self._error(404, "not found")

    def do_POST(self):
        try:
            length = int(self.headers.get("Content-Length") or 0)
            if length > MAX_TEXT_CHARS * 8:
                self._error(413, "request body too large")
                return
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._error(400, "malformed JSON body")
                return
            if not isinstance(body, dict):
                self._error(400, "body must be a JSON object")
                return
            if self.path == "/v1/translate":
                self._send(200, self.app.translate(body))
            elif self.path == "/v1/parse":
                self._send(200, self.app.parse(body))
            else:
                self._error(404, "not found")
        except ApiError as exc:
            self._error(exc.status, exc.message)
        except Exception as exc:  # keep the server alive on handler bugs
            self._error(500, f"internal error: {exc}")


def make_server(pack: GrammarPack, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    """Build a threading HTTP server bound to host:port, not yet serving."""
    app = _App(pack)
    handler = type("BoundHandler", (_Handler,), {"app": app})
    return ThreadingHTTPServer((host, port), handler)


def run_server(pack: GrammarPack, host: str = "127.0.0.1", port: int = 8080) -> None:
    server = make_server(pack, host, port)
    host_shown = server.server_address[0]
    print(f"serving {pack.name} on http://{host_shown}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
