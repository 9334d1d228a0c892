"""HTTP JSON API: endpoints, validation, CORS, concurrency.

A real ThreadingHTTPServer is started on an ephemeral port once per
module; requests go through http.client so status lines, headers, and
bodies are exercised exactly as a remote client would see them.
"""

import http.client
import json
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

from lcnl import Translator, demo_pack_path, load_pack
from lcnl.service import MAX_TEXT_CHARS, make_server

FLAGSHIP_EN = "John does not believe that the queen is sixty-five years old"
FLAGSHIP_FR = "John ne croit pas que la reine ait soixante-cinq ans"


@pytest.fixture(scope="module")
def server():
    pack = load_pack(demo_pack_path())
    srv = make_server(pack, "127.0.0.1", port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()
    thread.join(timeout=5)


def request(server, method, path, body=None, raw=None):
    host, port = server.server_address
    conn = http.client.HTTPConnection(host, port, timeout=30)
    try:
        if raw is not None:
            payload = raw
        elif body is not None:
            payload = json.dumps(body).encode("utf-8")
        else:
            payload = None
        headers = {"Content-Type": "application/json"} if payload else {}
        conn.request(method, path, body=payload, headers=headers)
        resp = conn.getresponse()
        data = resp.read()
        return resp.status, dict(resp.getheaders()), data
    finally:
        conn.close()


class TestEndpoints:
    def test_health(self, server):
        status, headers, data = request(server, "GET", "/v1/health")
        assert status == 200
        assert data == b'{"status":"ok"}'
        assert headers["Content-Type"].startswith("application/json")

    def test_languages(self, server):
        status, _, data = request(server, "GET", "/v1/languages")
        assert status == 200
        assert json.loads(data) == {"languages": ["eng", "fra"]}

    def test_translate_flagship(self, server):
        status, _, data = request(server, "POST", "/v1/translate", {
            "text": FLAGSHIP_EN, "from": "eng", "to": "fra",
        })
        assert status == 200
        payload = json.loads(data)
        assert payload["target"] == FLAGSHIP_FR
        layers = [s["layer"] for s in payload["spans"]]
        assert layers == ["syntactic", "semantic"]

    def test_translate_body_matches_library_json(self, server):
        status, _, data = request(server, "POST", "/v1/translate", {
            "text": FLAGSHIP_EN, "from": "eng", "to": "fra",
        })
        assert status == 200
        pack = load_pack(demo_pack_path())
        expected = Translator(pack.grammar).translate(FLAGSHIP_EN, "eng", "fra")
        assert data.decode("utf-8") == expected.to_json()

    def test_parse_shape(self, server):
        status, _, data = request(server, "POST", "/v1/parse", {
            "text": "this old city", "language": "eng", "k": 3,
        })
        assert status == 200
        payload = json.loads(data)
        assert payload["text"] == "this old city"
        assert payload["language"] == "eng"
        assert len(payload["trees"]) == 3
        for entry in payload["trees"]:
            assert set(entry) == {"tree", "cost"}
            assert entry["tree"].startswith("(UseChunks ")
        costs = [entry["cost"] for entry in payload["trees"]]
        assert costs == sorted(costs)

    def test_parse_k_defaults_to_five(self, server):
        status, _, data = request(server, "POST", "/v1/parse", {
            "text": "this old city", "language": "eng",
        })
        assert status == 200
        assert len(json.loads(data)["trees"]) == 5


class TestValidation:
    @pytest.mark.parametrize("body", [
        {"from": "eng", "to": "fra"},
        {"text": 5, "from": "eng", "to": "fra"},
        {"text": "hi", "to": "fra"},
        {"text": "hi", "from": "eng"},
        {"text": "hi", "from": ["eng"], "to": "fra"},
    ])
    def test_missing_or_non_string_fields(self, server, body):
        status, _, data = request(server, "POST", "/v1/translate", body)
        assert status == 400
        assert "error" in json.loads(data)

    def test_malformed_json(self, server):
        status, _, data = request(server, "POST", "/v1/translate", raw=b"{not json")
        assert status == 400
        assert json.loads(data)["error"] == "malformed JSON body"

    def test_non_object_body(self, server):
        status, _, data = request(server, "POST", "/v1/translate", raw=b'["x"]')
        assert status == 400
        assert json.loads(data)["error"] == "body must be a JSON object"

    @pytest.mark.parametrize("k", [0, -1, "3", 2.5, True])
    def test_bad_k(self, server, k):
        status, _, data = request(server, "POST", "/v1/parse", {
            "text": "John is old", "language": "eng", "k": k,
        })
        assert status == 400
        assert json.loads(data)["error"] == "k must be a positive integer"

    def test_oversized_text(self, server):
        status, _, data = request(server, "POST", "/v1/translate", {
            "text": "x" * (MAX_TEXT_CHARS + 1), "from": "eng", "to": "fra",
        })
        assert status == 413
        assert "error" in json.loads(data)

    def test_unknown_language(self, server):
        status, _, data = request(server, "POST", "/v1/translate", {
            "text": "John is old", "from": "zzz", "to": "fra",
        })
        assert status == 400
        assert "zzz" in json.loads(data)["error"]

    def test_unknown_route(self, server):
        for method, path in [("GET", "/v1/nope"), ("POST", "/v1/nope"), ("GET", "/")]:
            status, _, data = request(server, method, path, body={} if method == "POST" else None)
            assert status == 404
            assert json.loads(data)["error"] == "not found"


class TestCors:
    def test_preflight(self, server):
        status, headers, data = request(server, "OPTIONS", "/v1/translate")
        assert status == 204
        assert headers["Access-Control-Allow-Origin"] == "*"
        assert "POST" in headers["Access-Control-Allow-Methods"]
        assert data == b""

    def test_cors_header_on_responses(self, server):
        _, headers, _ = request(server, "GET", "/v1/health")
        assert headers["Access-Control-Allow-Origin"] == "*"
        _, headers, _ = request(server, "POST", "/v1/translate", {"text": "hi"})
        assert headers["Access-Control-Allow-Origin"] == "*"


class TestConcurrency:
    def test_parallel_requests_get_their_own_answers(self, server):
        sentences = [
            "John is old",
            "John is sixty-five years old",
            FLAGSHIP_EN,
            "this old city",
        ] * 4

        def call(text):
            status, _, data = request(server, "POST", "/v1/translate", {
                "text": text, "from": "eng", "to": "fra",
            })
            return text, status, json.loads(data)

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(call, sentences))
        pack = load_pack(demo_pack_path())
        tr = Translator(pack.grammar)
        for text, status, payload in results:
            assert status == 200
            assert payload["source"] == text
            assert payload["target"] == tr.translate(text, "eng", "fra").target
