"""Wrapper induction for product prices on Vietnamese commercial sites."""

from .dom import DomTree, NodePath, parse_html
from .patterns import PatternPair, Role, XpathPattern, similarity
from .pricing import PriceCandidate, RuleSet, Verdict, classify, classify_tree, detect_numbers
from .induction import InductionResult, induce
from .discovery import (FixtureSearchProvider, SiteSupport, build_query, discover,
                        identify_sites)
from .crawler import CrawlConfig, Fetcher, PageStore, crawl_site, crawl_sites
from .pipeline import (ProductRecord, ProductStore, SeedStore, evaluate, f_measure,
                       normalize_price)

__version__ = "0.1.0"

__all__ = [
    "CrawlConfig", "DomTree", "Fetcher", "FixtureSearchProvider", "InductionResult",
    "NodePath", "PageStore", "PatternPair", "PriceCandidate", "ProductRecord",
    "ProductStore", "Role", "RuleSet", "SeedStore", "SiteSupport", "Verdict",
    "XpathPattern", "build_query", "classify", "classify_tree", "crawl_site",
    "crawl_sites", "detect_numbers", "discover", "evaluate", "f_measure",
    "identify_sites", "induce", "normalize_price", "parse_html", "similarity",
]
