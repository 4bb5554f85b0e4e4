"""Polite same-site breadth-first crawling.

Every request goes through a :class:`Fetcher`, which owns a per-host gate:
one in-flight request per host, and at least ``delay`` seconds between the
end of one response and the start of the next request to that host.  The
gate is shared by every caller of the fetcher (discovery and crawling), so
concurrent site crawls only run in parallel across different hosts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import mimetypes
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Iterator
from urllib.parse import urljoin, urlsplit
from urllib.robotparser import RobotFileParser

import requests

from .dom import DomTree, parse_html
from .errors import EmptyDocument, FetchError, StoreUnavailable
from .urls import normalize_url, site_of, url_to_relpath

log = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "pricewrap/0.1"


# --------------------------------------------------------------------------
# fetching


@dataclass
class Response:
    url: str
    status: int
    body: bytes
    content_type: str = "text/html"

    @property
    def is_html(self) -> bool:
        ctype = self.content_type.split(";")[0].strip().lower()
        return ctype in ("", "text/html", "application/xhtml+xml")


class HttpTransport:
    """Plain HTTP(S) via requests, optionally through a proxy."""

    def __init__(self, timeout: float = 15.0, user_agent: str = DEFAULT_USER_AGENT,
                 proxy: str | None = None) -> None:
        self.timeout = timeout
        self.user_agent = user_agent
        self.proxy = proxy
        self._local = threading.local()

    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            session.headers["User-Agent"] = self.user_agent
            if self.proxy:
                session.trust_env = False
                session.proxies = {"http": self.proxy, "https": self.proxy}
            self._local.session = session
        return session

    def get(self, url: str) -> Response:
        try:
            r = self._session().get(url, timeout=self.timeout)
        except requests.RequestException as exc:
            raise FetchError(url, str(exc)) from exc
        if r.status_code >= 400:
            raise FetchError(url, f"HTTP {r.status_code}", r.status_code)
        return Response(r.url, r.status_code, r.content, r.headers.get("Content-Type", ""))


class CorpusTransport:
    """Serves URLs from a directory laid out by :func:`url_to_relpath`."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    def get(self, url: str) -> Response:
        path = self.root / url_to_relpath(url)
        if not path.is_file():
            raise FetchError(url, "HTTP 404", 404)
        ctype = mimetypes.guess_type(path.name.split("?")[0])[0] or "text/html"
        return Response(normalize_url(url), 200, path.read_bytes(), ctype)


class HostGate:
    """Serializes requests per host and enforces a minimum gap between them."""

    def __init__(self, delay: float) -> None:
        self.delay = delay
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._last_done: dict[str, float] = {}

    @contextmanager
    def slot(self, host: str) -> Iterator[None]:
        with self._guard:
            lock = self._locks.setdefault(host, threading.Lock())
        with lock:
            last = self._last_done.get(host)
            if last is not None:
                wait = last + self.delay - time.monotonic()
                if wait > 0:
                    time.sleep(wait)
            try:
                yield
            finally:
                self._last_done[host] = time.monotonic()


class Fetcher:
    def __init__(self, transport, delay: float = 1.0) -> None:
        self.transport = transport
        self.gate = HostGate(delay)

    @classmethod
    def from_settings(cls, delay_ms: float = 1000, timeout_ms: float = 15000,
                      user_agent: str = DEFAULT_USER_AGENT, proxy: str | None = None,
                      corpus_dir: str | Path | None = None) -> Fetcher:
        if corpus_dir is not None:
            transport = CorpusTransport(corpus_dir)
        else:
            transport = HttpTransport(timeout_ms / 1000.0, user_agent, proxy)
        return cls(transport, delay_ms / 1000.0)

    def get(self, url: str) -> Response:
        with self.gate.slot(site_of(url)):
            return self.transport.get(url)


# --------------------------------------------------------------------------
# crawling


@dataclass(frozen=True)
class CrawlConfig:
    max_pages: int = 1000
    max_depth: int = 6
    delay_ms: float = 1000
    timeout_ms: float = 15000
    user_agent: str = DEFAULT_USER_AGENT
    respect_robots: bool = True

    def __post_init__(self) -> None:
        if self.max_pages < 1:
            raise ValueError("max_pages must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.delay_ms < 0:
            raise ValueError("delay must be >= 0")
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be > 0")


@dataclass
class CrawledPage:
    url: str
    site: str
    depth: int
    body: bytes
    fetched_at: datetime


@dataclass
class CrawlSummary:
    site: str
    pages: int = 0
    errors: list[dict] = field(default_factory=list)
    skipped: int = 0

    def to_dict(self) -> dict:
        return {"site": self.site, "pages": self.pages, "errors": self.errors,
                "skipped": self.skipped}


def extract_links(tree: DomTree, base_url: str) -> list[str]:
    """Absolute, normalized http(s) targets of ``<a href>`` elements, in document order."""
    base = base_url
    for node in tree.iter_nodes():
        if node.tag == "base" and node.attributes.get("href"):
            base = urljoin(base_url, node.attributes["href"])
            break
    links = []
    for node in tree.iter_nodes():
        if node.tag != "a":
            continue
        href = node.attributes.get("href", "").strip()
        if not href or href.startswith(("#", "javascript:", "mailto:", "tel:")):
            continue
        url = normalize_url(href, base)
        if urlsplit(url).scheme in ("http", "https"):
            links.append(url)
    return links


class _Robots:
    def __init__(self, fetcher: Fetcher, user_agent: str) -> None:
        self.fetcher = fetcher
        self.user_agent = user_agent
        self._parsers: dict[str, RobotFileParser | None] = {}

    def allowed(self, url: str) -> bool:
        parts = urlsplit(url)
        origin = f"{parts.scheme}://{parts.netloc}"
        if origin not in self._parsers:
            parser = None
            try:
                resp = self.fetcher.get(origin + "/robots.txt")
                parser = RobotFileParser()
                parser.parse(resp.body.decode("utf-8", "replace").splitlines())
            except FetchError:
                parser = None
            self._parsers[origin] = parser
        parser = self._parsers[origin]
        return True if parser is None else parser.can_fetch(self.user_agent, url)


def crawl_site(site: str, seed_urls: Iterable[str], config: CrawlConfig,
               sink: Callable[[CrawledPage], None], fetcher: Fetcher) -> CrawlSummary:
    """Breadth-first crawl of one host, delivering pages to ``sink`` in fetch order."""
    site = site.lower()
    summary = CrawlSummary(site)
    robots = _Robots(fetcher, config.user_agent) if config.respect_robots else None
    seen: set[str] = set()
    frontier: deque[tuple[str, int]] = deque()
    for url in seed_urls:
        url = normalize_url(url)
        if site_of(url) != site:
            log.warning("seed %s is not on %s; ignored", url, site)
            continue
        if url not in seen:
            seen.add(url)
            frontier.append((url, 0))

    while frontier and summary.pages < config.max_pages:
        url, depth = frontier.popleft()
        if robots is not None and not robots.allowed(url):
            summary.skipped += 1
            continue
        try:
            resp = fetcher.get(url)
        except FetchError as exc:
            summary.errors.append({"url": url, "reason": exc.reason})
            continue
        final = normalize_url(resp.url)
        if site_of(final) != site:
            summary.skipped += 1
            continue
        seen.add(final)
        if not resp.is_html:
            summary.skipped += 1
            continue
        sink(CrawledPage(url, site, depth, resp.body, datetime.now(timezone.utc)))
        summary.pages += 1
        if depth >= config.max_depth:
            continue
        try:
            tree = parse_html(resp.body)
        except EmptyDocument:
            continue
        for link in extract_links(tree, final):
            if link not in seen and site_of(link) == site:
                seen.add(link)
                frontier.append((link, depth + 1))
    log.info("crawled %s: %d pages, %d errors", site, summary.pages, len(summary.errors))
    return summary


def crawl_sites(seeds_by_site: dict[str, list[str]], config: CrawlConfig,
                sink: Callable[[CrawledPage], None], fetcher: Fetcher,
                workers: int = 4) -> list[CrawlSummary]:
    """Crawl several sites concurrently; ``sink`` must be thread-safe."""
    sites = sorted(seeds_by_site)
    if not sites:
        return []
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(sites)))) as pool:
        futures = [pool.submit(crawl_site, s, seeds_by_site[s], config, sink, fetcher)
                   for s in sites]
        return [f.result() for f in futures]


# --------------------------------------------------------------------------
# page storage


def page_file_name(url: str) -> str:
    return hashlib.sha1(url.encode("utf-8")).hexdigest() + ".html"


class PageStore:
    """Crawled pages as files named by URL hash, plus an ``index.jsonl``.

    Usable directly as a thread-safe crawl sink.
    """

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self._lock = threading.Lock()
        try:
            (self.directory / "pages").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc

    @property
    def index_path(self) -> Path:
        return self.directory / "index.jsonl"

    def __call__(self, page: CrawledPage) -> None:
        self.add(page)

    def add(self, page: CrawledPage) -> None:
        name = page_file_name(page.url)
        entry = {
            "url": page.url,
            "site": page.site,
            "depth": page.depth,
            "file": f"pages/{name}",
            "fetched_at": page.fetched_at.isoformat(),
        }
        with self._lock:
            (self.directory / "pages" / name).write_bytes(page.body)
            with open(self.index_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def __iter__(self) -> Iterator[CrawledPage]:
        return iter(load_pages(self.directory))


def load_pages(directory: str | Path) -> list[CrawledPage]:
    """Read back a :class:`PageStore`; a URL indexed twice keeps its latest entry."""
    directory = Path(directory)
    index = directory / "index.jsonl"
    if not index.exists():
        raise StoreUnavailable(f"no page index at {index}")
    latest: dict[str, dict] = {}
    with open(index, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entry = json.loads(line)
                latest.pop(entry["url"], None)
                latest[entry["url"]] = entry
    pages = []
    for entry in latest.values():
        body = (directory / entry["file"]).read_bytes()
        pages.append(CrawledPage(entry["url"], entry["site"], entry["depth"], body,
                                 datetime.fromisoformat(entry["fetched_at"])))
    return pages
