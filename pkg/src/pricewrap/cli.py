"""Command line entry point: ``pricewrap {discover,crawl,extract,evaluate,run-all}``.

Stages hand off through files in the output directory::

    OUT/sites.jsonl          discover -> crawl, extract
    OUT/pages/index.jsonl    crawl -> extract
    STORES/products.jsonl    extract -> evaluate
    STORES/seeds.txt         extract (feedback loop)

Each invocation prints one JSON report on stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from .crawler import CrawlConfig, Fetcher, PageStore, crawl_sites, load_pages
from .discovery import (DEFAULT_THRESHOLD, FixtureSearchProvider, LiveSearchProvider,
                        QueryTemplate, discover, identify_sites, read_sites, write_sites)
from .errors import ConfigError, PricewrapError
from .pipeline import (NameKeys, ProductStore, SeedStore, evaluate, extract_pages,
                       load_gold)
from .pricing import RuleSet
from .urls import normalize_url

log = logging.getLogger("pricewrap")

STAGES = ("discover", "crawl", "extract", "evaluate", "run-all")


@dataclass
class PipelineConfig:
    out: Path = Path("out")
    rules: Path | None = None
    seeds: Path | None = None
    provider: str = "fixture"
    provider_file: Path | None = None
    live_endpoint: str | None = None
    stores: Path | None = None
    gold: Path | None = None
    corpus_dir: Path | None = None
    proxy: str | None = None
    top_k: int = 10
    threshold: int = DEFAULT_THRESHOLD
    query_template: str = QueryTemplate().format
    workers: int = 4
    index_sensitive: bool = True
    aliases: dict[str, str] = field(default_factory=dict)
    crawl: CrawlConfig = field(default_factory=CrawlConfig)

    @property
    def stores_dir(self) -> Path:
        return self.stores or self.out / "stores"

    @property
    def sites_path(self) -> Path:
        return self.out / "sites.jsonl"

    @property
    def pages_dir(self) -> Path:
        return self.out / "pages"

    def load_rules(self) -> RuleSet:
        return RuleSet.load(self.rules) if self.rules else RuleSet.default()

    def read_seeds(self) -> list[str]:
        if self.seeds is None:
            raise ConfigError("no seeds file configured")
        try:
            lines = Path(self.seeds).read_text(encoding="utf-8").splitlines()
        except FileNotFoundError as exc:
            raise ConfigError(f"seeds file not found: {self.seeds}") from exc
        return [s.strip() for s in lines if s.strip()]

    def fetcher(self) -> Fetcher:
        return Fetcher.from_settings(self.crawl.delay_ms, self.crawl.timeout_ms,
                                     self.crawl.user_agent, self.proxy, self.corpus_dir)

    def validate(self) -> None:
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.threshold < 1:
            raise ConfigError("threshold must be >= 1")
        if self.provider not in ("fixture", "live"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        for name in ("rules", "seeds", "provider_file", "gold"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{name} file not found: {path}")
        if self.corpus_dir is not None and not Path(self.corpus_dir).is_dir():
            raise ConfigError(f"corpus_dir not found: {self.corpus_dir}")


_PATH_KEYS = ("out", "rules", "seeds", "provider_file", "stores", "gold", "corpus_dir")


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a JSON config; relative paths resolve against the config file's directory."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    base = path.parent
    kwargs = {}
    for key, value in data.items():
        if key == "crawl":
            try:
                kwargs["crawl"] = CrawlConfig(**value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad crawl settings: {exc}") from exc
        elif key in _PATH_KEYS:
            kwargs[key] = base / value if value is not None else None
        elif key in PipelineConfig.__dataclass_fields__:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return PipelineConfig(**kwargs)


# --------------------------------------------------------------------------
# stages


def stage_discover(cfg: PipelineConfig, fetcher: Fetcher) -> dict:
    rules = cfg.load_rules()
    seeds = cfg.read_seeds()
    if cfg.provider == "fixture":
        if cfg.provider_file is None:
            raise ConfigError("fixture provider needs provider_file")
        provider = FixtureSearchProvider.load(cfg.provider_file)
    else:
        provider = (LiveSearchProvider(fetcher, cfg.live_endpoint) if cfg.live_endpoint
                    else LiveSearchProvider(fetcher))
    results = discover(seeds, provider, cfg.top_k, rules, fetcher,
                       QueryTemplate(cfg.query_template), cfg.workers, cfg.index_sensitive)
    sites = identify_sites(results, cfg.threshold)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_sites(cfg.sites_path, sites)
    return {"seeds": len(seeds), "induced_pages": len(results),
            "sites_identified": len({s.site for s in sites}),
            "sites": sorted({s.site for s in sites}), "sites_file": str(cfg.sites_path)}


def stage_crawl(cfg: PipelineConfig, fetcher: Fetcher, sites_path: Path | None = None) -> dict:
    sites = read_sites(sites_path or cfg.sites_path)
    seeds_by_site: dict[str, list[str]] = {}
    for s in sites:
        urls = seeds_by_site.setdefault(s.site, [])
        for url in s.urls:
            root = normalize_url("/", url)
            for u in (url, root):
                if u not in urls:
                    urls.append(u)
    if cfg.pages_dir.exists():
        shutil.rmtree(cfg.pages_dir)
    store = PageStore(cfg.pages_dir)
    summaries = crawl_sites(seeds_by_site, cfg.crawl, store, fetcher, cfg.workers)
    return {"sites": len(summaries), "pages_crawled": sum(s.pages for s in summaries),
            "errors": sum(len(s.errors) for s in summaries),
            "per_site": [s.to_dict() | {"errors": len(s.errors)} for s in summaries],
            "pages_dir": str(cfg.pages_dir)}


def stage_extract(cfg: PipelineConfig, now: datetime | None = None) -> dict:
    rules = cfg.load_rules()
    sites = read_sites(cfg.sites_path)
    keys = NameKeys(cfg.aliases)
    stores = cfg.stores_dir
    seeds_path = stores / "seeds.txt"
    seeds = SeedStore(seeds_path, keys)
    if len(seeds) == 0 and cfg.seeds is not None:
        for name in cfg.read_seeds():
            seeds.add(name)
    products = ProductStore(stores / "products.jsonl", keys)
    report = extract_pages(load_pages(cfg.pages_dir), sites, rules, products, seeds, now)
    products.compact()
    return report.to_dict() | {"records_upserted": report.inserted + report.updated,
                               "products_total": len(products),
                               "seeds_total": len(seeds)}


def stage_evaluate(cfg: PipelineConfig) -> dict:
    if cfg.gold is None:
        raise ConfigError("evaluate needs a gold file")
    products = ProductStore(cfg.stores_dir / "products.jsonl")
    predicted = [(r.url, r.name, r.raw_price) for r in products.records()]
    scores = evaluate(predicted, load_gold(cfg.gold), cfg.load_rules())
    return {"predicted": len(predicted), "recall": scores.recall,
            "precision": scores.precision, "f_measure": scores.f_measure,
            "f_measure_pct": round(100 * scores.f_measure, 2)}


def run_stage(stage: str, cfg: PipelineConfig) -> dict:
    cfg.validate()
    if stage == "evaluate":
        return stage_evaluate(cfg)
    if stage == "extract":
        return stage_extract(cfg)
    fetcher = cfg.fetcher()
    if stage == "discover":
        return stage_discover(cfg, fetcher)
    if stage == "crawl":
        return stage_crawl(cfg, fetcher)
    if stage == "run-all":
        now = datetime.now(timezone.utc)
        d = stage_discover(cfg, fetcher)
        c = stage_crawl(cfg, fetcher)
        e = stage_extract(cfg, now)
        return {"sites_identified": d["sites_identified"], "sites": d["sites"],
                "pages_crawled": c["pages_crawled"], "records_upserted": e["records_upserted"],
                "seeds_added": e["seeds_added"], "discover": d, "crawl": c, "extract": e}
    raise ConfigError(f"unknown stage {stage!r}")


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pricewrap", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="JSON pipeline config")
    parser.add_argument("--out", help="working/output directory")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="stage", required=True)

    p = sub.add_parser("discover", help="find commercial sites and their pattern pairs")
    p.add_argument("--seeds")
    p.add_argument("--top-k", type=int)
    p.add_argument("--threshold", type=int)
    p.add_argument("--rules")
    p.add_argument("--provider", choices=("fixture", "live"))
    p.add_argument("--provider-file", help="query -> URL list JSON for the fixture provider")
    p.add_argument("--corpus-dir", help="serve URLs from a local corpus directory")
    p.add_argument("--sites-out", "--sites-file", dest="sites_out",
                   help="where to write sites.jsonl (default OUT/sites.jsonl)")

    p = sub.add_parser("crawl", help="crawl identified sites")
    p.add_argument("--sites", help="sites.jsonl from discover")
    p.add_argument("--max-pages", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--delay", type=float, help="milliseconds between requests to one host")
    p.add_argument("--no-robots", action="store_true")
    p.add_argument("--corpus-dir")
    p.add_argument("--pages-out", help="pages directory (default OUT/pages)")

    p = sub.add_parser("extract", help="extract product records from crawled pages")
    p.add_argument("--sites")
    p.add_argument("--pages")
    p.add_argument("--rules")
    p.add_argument("--stores")

    p = sub.add_parser("evaluate", help="score extracted records against a gold file")
    p.add_argument("--gold")
    p.add_argument("--stores")

    p = sub.add_parser("run-all", help="discover, crawl and extract")
    p.add_argument("--corpus-dir")
    return parser


def _apply_args(cfg: PipelineConfig, args: argparse.Namespace) -> tuple[PipelineConfig, dict]:
    """Fold command line overrides into ``cfg``; returns extra per-stage paths."""
    if args.out:
        cfg.out = Path(args.out)
    simple = {"seeds": "seeds", "rules": "rules", "provider_file": "provider_file",
              "corpus_dir": "corpus_dir", "stores": "stores", "gold": "gold"}
    for arg, attr in simple.items():
        value = getattr(args, arg, None)
        if value:
            setattr(cfg, attr, Path(value))
    for arg in ("top_k", "threshold", "provider"):
        value = getattr(args, arg, None)
        if value is not None:
            setattr(cfg, arg, value)
    crawl_over = {}
    if getattr(args, "max_pages", None) is not None:
        crawl_over["max_pages"] = args.max_pages
    if getattr(args, "max_depth", None) is not None:
        crawl_over["max_depth"] = args.max_depth
    if getattr(args, "delay", None) is not None:
        crawl_over["delay_ms"] = args.delay
    if getattr(args, "no_robots", False):
        crawl_over["respect_robots"] = False
    if crawl_over:
        try:
            cfg.crawl = replace(cfg.crawl, **crawl_over)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    extra = {k: getattr(args, k, None) for k in ("sites", "pages", "sites_out", "pages_out")}
    return cfg, extra


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    stage = args.stage
    try:
        cfg, extra = _apply_args(load_config(args.config), args)
        report = _run_with_paths(stage, cfg, extra)
    except PricewrapError as exc:
        report = {"stage": stage, "status": "error", "error": type(exc).__name__,
                  "message": str(exc)}
        print(json.dumps(report, ensure_ascii=False, indent=2))
        return 2
    print(json.dumps({"stage": stage, "status": "ok", **report}, ensure_ascii=False, indent=2))
    return 0


def _run_with_paths(stage: str, cfg: PipelineConfig, extra: dict) -> dict:
    """Honour per-stage file overrides by copying them into the OUT layout."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    sites_in = extra.get("sites")
    if sites_in and Path(sites_in).resolve() != cfg.sites_path.resolve():
        if not Path(sites_in).is_file():
            raise ConfigError(f"sites file not found: {sites_in}")
        shutil.copyfile(sites_in, cfg.sites_path)
    pages_in = extra.get("pages")
    if pages_in and Path(pages_in).resolve() != cfg.pages_dir.resolve():
        if cfg.pages_dir.exists():
            shutil.rmtree(cfg.pages_dir)
        shutil.copytree(pages_in, cfg.pages_dir)
    report = run_stage(stage, cfg)
    if stage == "discover" and extra.get("sites_out"):
        shutil.copyfile(cfg.sites_path, extra["sites_out"])
        report["sites_file"] = extra["sites_out"]
    if stage == "crawl" and extra.get("pages_out"):
        dest = Path(extra["pages_out"])
        if dest.resolve() != cfg.pages_dir.resolve():
            if dest.exists():
                shutil.rmtree(dest)
            shutil.copytree(cfg.pages_dir, dest)
            report["pages_dir"] = str(dest)
    return report


if __name__ == "__main__":
    sys.exit(main())
