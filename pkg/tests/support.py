"""Test helpers: an instrumented HTTP server that serves a corpus directory.

The server answers proxy-style requests (absolute URI in the request line) as
well as plain ones routed by the Host header, so the production HTTP transport
can reach made-up hostnames by pointing its proxy at 127.0.0.1.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlsplit

from pricewrap.urls import url_to_relpath


class RequestLog:
    def __init__(self) -> None:
        self.lock = threading.Lock()
        self.entries: list[dict] = []
        self.in_flight: dict[str, int] = {}
        self.max_in_flight: dict[str, int] = {}

    def begin(self, host: str, url: str) -> dict:
        entry = {"host": host, "url": url, "start": time.monotonic(), "end": None}
        with self.lock:
            n = self.in_flight.get(host, 0) + 1
            self.in_flight[host] = n
            self.max_in_flight[host] = max(self.max_in_flight.get(host, 0), n)
            self.entries.append(entry)
        return entry

    def end(self, entry: dict) -> None:
        with self.lock:
            entry["end"] = time.monotonic()
            self.in_flight[entry["host"]] -= 1

    def by_host(self) -> dict[str, list[dict]]:
        out: dict[str, list[dict]] = {}
        for e in sorted(self.entries, key=lambda e: e["start"]):
            out.setdefault(e["host"], []).append(e)
        return out

    def urls(self, include_robots: bool = False) -> list[str]:
        return [e["url"] for e in self.entries
                if include_robots or not e["url"].endswith("/robots.txt")]


class CorpusServer:
    """``with CorpusServer(root) as srv: ... srv.proxy ...``"""

    def __init__(self, root: str | Path, latency: float = 0.0) -> None:
        self.root = Path(root)
        self.latency = latency
        self.log = RequestLog()
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def do_GET(self) -> None:  # noqa: N802
                if self.path.startswith("http"):
                    url = self.path
                else:
                    url = f"http://{self.headers.get('Host', 'localhost')}{self.path}"
                host = (urlsplit(url).hostname or "").lower()
                entry = server.log.begin(host, url)
                if server.latency:
                    time.sleep(server.latency)
                path = server.root / url_to_relpath(url)
                if path.is_file():
                    status, body = 200, path.read_bytes()
                else:
                    status, body = 404, b"not found"
                # the response is complete from the server's side before the
                # client can see a single byte of it
                server.log.end(entry)
                self.send_response(status)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args) -> None:
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.thread = threading.Thread(target=self.httpd.serve_forever, args=(0.02,), daemon=True)

    @property
    def proxy(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> CorpusServer:
        self.thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()




def write_config(info, out: Path, **extra) -> Path:
    """Pipeline config for a generated corpus; ``extra`` overrides top-level keys."""
    config = {
        "rules": "rules.json",
        "seeds": "seeds.txt",
        "provider_file": "provider.json",
        "gold": "gold.jsonl",
        "corpus_dir": "corpus",
        "out": str(out),
        "top_k": 10,
        "threshold": 3,
        "crawl": {"delay_ms": 0},
    }
    config.update(extra)
    path = Path(info.root) / "config.json"
    path.write_text(json.dumps(config, indent=1), encoding="utf-8")
    return path
