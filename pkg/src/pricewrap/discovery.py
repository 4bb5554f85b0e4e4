"""From seed names to commercial sites and their suitable pattern pairs."""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol
from urllib.parse import parse_qs, quote_plus, urlsplit

from .crawler import Fetcher
from .dom import normalize_space, parse_html
from .errors import BlankName, ConfigError, PricewrapError, ProviderUnavailable
from .induction import InductionResult, induce
from .patterns import PatternPair
from .pricing import RuleSet
from .urls import normalize_url, site_of

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 3
_QUOTES = re.compile(r"[\"“”„«»]")


@dataclass(frozen=True)
class QueryTemplate:
    format: str = '"{product_name}" "vnđ or usd"'

    def __post_init__(self) -> None:
        if "{product_name}" not in self.format:
            raise ConfigError("query template needs a {product_name} placeholder")


def clean_name(product_name: str) -> str:
    """Strip double quotes and collapse whitespace."""
    return normalize_space(_QUOTES.sub(" ", product_name))


def build_query(product_name: str, template: QueryTemplate = QueryTemplate()) -> str:
    name = clean_name(product_name)
    if not name:
        raise BlankName("cannot build a query for a blank product name")
    return template.format.replace("{product_name}", name)


class SearchProvider(Protocol):
    def search(self, query: str, top_k: int) -> list[str]: ...


class FixtureSearchProvider:
    """Answers queries from a JSON document mapping query -> ordered URL list."""

    def __init__(self, mapping: dict[str, list[str]]) -> None:
        self.mapping = mapping
        self.calls: list[str] = []

    @classmethod
    def load(cls, path: str | Path) -> FixtureSearchProvider:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"provider file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"provider file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("provider file must map query strings to URL lists")
        return cls({str(k): list(v) for k, v in data.items()})

    def search(self, query: str, top_k: int) -> list[str]:
        self.calls.append(query)
        if query not in self.mapping:
            raise ProviderUnavailable(f"no fixture results for {query!r}")
        return list(self.mapping[query][:top_k])


class LiveSearchProvider:
    """Best-effort HTML search results scraper.

    ``endpoint`` is a URL template with a ``{query}`` placeholder.  Result
    links are the anchors pointing off the search engine's own host; redirect
    wrappers carrying the target in a ``uddg``/``q``/``url`` parameter are
    unwrapped.
    """

    def __init__(self, fetcher: Fetcher,
                 endpoint: str = "https://html.duckduckgo.com/html/?q={query}") -> None:
        self.fetcher = fetcher
        self.endpoint = endpoint

    def search(self, query: str, top_k: int) -> list[str]:
        url = self.endpoint.replace("{query}", quote_plus(query))
        try:
            resp = self.fetcher.get(url)
            tree = parse_html(resp.body)
        except PricewrapError as exc:
            raise ProviderUnavailable(str(exc)) from exc
        engine = site_of(url)
        results: list[str] = []
        for node in tree.iter_nodes():
            if node.tag != "a" or "href" not in node.attributes:
                continue
            target = normalize_url(node.attributes["href"], url)
            params = parse_qs(urlsplit(target).query)
            for key in ("uddg", "q", "url"):
                if key in params and params[key][0].startswith("http"):
                    target = normalize_url(params[key][0])
                    break
            if site_of(target) in ("", engine) or target in results:
                continue
            results.append(target)
            if len(results) >= top_k:
                break
        return results


def discover(seeds: Iterable[str], provider: SearchProvider, top_k: int, rules: RuleSet,
             fetcher: Fetcher, template: QueryTemplate = QueryTemplate(),
             workers: int = 4, index_sensitive: bool = True) -> list[InductionResult]:
    """Query the provider for each seed and run induction on every returned page.

    Each distinct (normalized) URL is fetched and parsed once, even when
    several seeds or duplicate hits return it.  Failures are logged and skipped.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    jobs: list[tuple[str, str]] = []
    for seed in seeds:
        try:
            query = build_query(seed, template)
            urls = provider.search(query, top_k)
        except (BlankName, ProviderUnavailable) as exc:
            log.warning("seed %r skipped: %s", seed, exc)
            continue
        seen: set[str] = set()
        for url in urls[:top_k]:
            url = normalize_url(url)
            if url not in seen:
                seen.add(url)
                jobs.append((clean_name(seed), url))

    unique_urls = list(dict.fromkeys(url for _, url in jobs))

    def load(url: str):
        try:
            return parse_html(fetcher.get(url).body)
        except PricewrapError as exc:
            log.warning("cannot load %s: %s", url, exc)
            return None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        trees = dict(zip(unique_urls, pool.map(load, unique_urls)))

    results = []
    for seed, url in jobs:
        tree = trees.get(url)
        if tree is None:
            continue
        result = induce(tree, url, seed, rules, index_sensitive)
        if result is None:
            log.info("no pattern pair for %r on %s", seed, url)
            continue
        results.append(result)
    return results


@dataclass
class SiteSupport:
    site: str
    pair: PatternPair
    count: int
    urls: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"site": self.site, **self.pair.to_dict(), "support": self.count,
                "urls": self.urls}

    @classmethod
    def from_dict(cls, data: dict) -> SiteSupport:
        return cls(data["site"], PatternPair.from_dict(data), int(data["support"]),
                   list(data.get("urls", [])))


def site_support(results: Iterable[InductionResult]) -> list[SiteSupport]:
    """Distinct-page support of every (site, pattern pair), sorted by site then pair."""
    pages: dict[tuple[str, tuple[str, str]], set[str]] = {}
    pairs: dict[tuple[str, str], PatternPair] = {}
    for r in results:
        key = (r.site.lower(), r.pair.key)
        pages.setdefault(key, set()).add(normalize_url(r.url))
        pairs[r.pair.key] = r.pair
    return [SiteSupport(site, pairs[pk], len(urls), sorted(urls))
            for (site, pk), urls in sorted(pages.items())]


def identify_sites(results: Iterable[InductionResult],
                   threshold: int = DEFAULT_THRESHOLD) -> list[SiteSupport]:
    """Keep (site, pair) groups supported by strictly more than ``threshold`` pages."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    return [s for s in site_support(results) if s.count > threshold]


def write_sites(path: str | Path, sites: Iterable[SiteSupport]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sites:
            fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")


def read_sites(path: str | Path) -> list[SiteSupport]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [SiteSupport.from_dict(json.loads(line)) for line in fh if line.strip()]
    except FileNotFoundError as exc:
        raise ConfigError(f"sites file not found: {path}") from exc
