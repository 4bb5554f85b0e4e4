"""Back end: apply site patterns to crawled pages, normalize prices, persist records.

Both stores are JSON-lines / plain-text files that are only ever appended to;
:meth:`ProductStore.compact` rewrites the product file keeping the last write
per key.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, NamedTuple

from .crawler import CrawledPage
from .discovery import SiteSupport
from .dom import normalize_space, parse_html, resolve
from .errors import (AmbiguousCurrency, EmptyDocument, EmptyGold, StoreUnavailable,
                     UnparseablePrice)
from .induction import normalize_name
from .patterns import PatternPair, apply_pattern
from .pricing import NUMBER_RE, NumberHit, RuleSet, Verdict, classify, fold_text, marker_pattern

log = logging.getLogger(__name__)

# marker (casefolded) -> currency code
CURRENCY_CODES = {"vnđ": "VND", "vnd": "VND", "đ": "VND", "₫": "VND",
                  "usd": "USD", "$": "USD", "us$": "USD"}
_CURRENCY_RE = marker_pattern(CURRENCY_CODES)


# --------------------------------------------------------------------------
# prices


def _check_groups(groups: list[str], text: str) -> None:
    if len(groups) > 1 and (len(groups[0]) > 3 or any(len(g) != 3 for g in groups[1:])):
        raise UnparseablePrice(f"bad digit grouping in {text!r}")


def normalize_price(price_text: str, rules: RuleSet | None = None) -> tuple[int, str]:
    """Return ``(amount, currency)``; VND amounts are whole dong, USD amounts are cents.

    The first number in ``price_text`` is the price; its currency comes from the
    nearest currency marker on either side.  Currency markers come from the
    fixed :data:`CURRENCY_CODES` table, so ``rules`` does not affect the result.
    """
    folded = fold_text(price_text)
    number = NUMBER_RE.search(folded)
    if number is None:
        raise UnparseablePrice(f"no number in {price_text!r}")
    best = None
    for m in _CURRENCY_RE.finditer(folded):
        distance = number.start() - m.end() if m.end() <= number.start() else m.start() - number.end()
        if distance >= 0 and (best is None or distance < best[0]):
            best = (distance, CURRENCY_CODES[m.group()])
    if best is None:
        raise AmbiguousCurrency(f"no currency marker in {price_text!r}")
    currency = best[1]
    digits = number.group()
    groups = re.split(r"[.,]", digits)
    if currency == "USD":
        cents = 0
        if len(groups) > 1 and len(groups[-1]) in (1, 2):
            cents = int(groups[-1].ljust(2, "0"))
            groups = groups[:-1]
        _check_groups(groups, price_text)
        return int("".join(groups)) * 100 + cents, currency
    _check_groups(groups, price_text)
    return int("".join(groups)), currency


def format_price(amount: int, currency: str) -> str:
    """Canonical text: ``540.000 VNĐ`` or ``$1,299.99``."""
    if currency == "VND":
        return f"{amount:,} VNĐ".replace(",", ".")
    if currency == "USD":
        return f"${amount // 100:,}.{amount % 100:02d}"
    raise ValueError(f"unknown currency {currency!r}")


# --------------------------------------------------------------------------
# records and stores


@dataclass(frozen=True)
class ProductRecord:
    name: str
    amount: int
    currency: str
    raw_price: str
    url: str
    site: str
    extracted_at: datetime

    def to_dict(self) -> dict:
        return {
            "name": self.name, "amount": self.amount, "currency": self.currency,
            "raw_price": self.raw_price, "url": self.url, "site": self.site,
            "extracted_at": self.extracted_at.astimezone(timezone.utc).isoformat(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ProductRecord:
        return cls(data["name"], int(data["amount"]), data["currency"], data["raw_price"],
                   data["url"], data["site"], datetime.fromisoformat(data["extracted_at"]))


class NameKeys:
    """Seed/product name keys: normalized name, then an optional alias lookup."""

    def __init__(self, aliases: dict[str, str] | None = None) -> None:
        self.aliases = {normalize_name(k): normalize_name(v) for k, v in (aliases or {}).items()}

    def __call__(self, name: str) -> str:
        key = normalize_name(name)
        return self.aliases.get(key, key)


def _atomic_write(path: Path, lines: Iterable[str]) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ProductStore:
    """``products.jsonl``; upserts by (site, url, name key), newest ``extracted_at`` wins."""

    def __init__(self, path: str | Path, keys: NameKeys | None = None) -> None:
        self.path = Path(path)
        self.keys = keys or NameKeys()
        self._lock = threading.Lock()
        self._records: dict[tuple[str, str, str], ProductRecord] = {}
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                with open(self.path, encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            self._merge(ProductRecord.from_dict(json.loads(line)))
        except (OSError, ValueError, KeyError) as exc:
            raise StoreUnavailable(f"cannot open {self.path}: {exc}") from exc

    def key(self, record: ProductRecord) -> tuple[str, str, str]:
        return record.site, record.url, self.keys(record.name)

    def _merge(self, record: ProductRecord) -> str:
        key = self.key(record)
        old = self._records.get(key)
        if old is None:
            self._records[key] = record
            return "inserted"
        if record.extracted_at < old.extracted_at:
            return "stale"
        self._records[key] = record
        same = (old.name, old.amount, old.currency, old.raw_price) == \
            (record.name, record.amount, record.currency, record.raw_price)
        return "unchanged" if same else "updated"

    def upsert(self, record: ProductRecord) -> str:
        with self._lock:
            outcome = self._merge(record)
            if outcome != "stale":
                try:
                    with open(self.path, "a", encoding="utf-8") as fh:
                        fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
                except OSError as exc:
                    raise StoreUnavailable(str(exc)) from exc
            return outcome

    def records(self) -> list[ProductRecord]:
        with self._lock:
            return [self._records[k] for k in sorted(self._records)]

    def __len__(self) -> int:
        return len(self._records)

    def compact(self) -> None:
        """Rewrite the file with one line per key, sorted by key."""
        with self._lock:
            _atomic_write(self.path, (json.dumps(self._records[k].to_dict(), ensure_ascii=False)
                                      for k in sorted(self._records)))


class SeedStore:
    """``seeds.txt``: one normalized name per line, no duplicates."""

    def __init__(self, path: str | Path, keys: NameKeys | None = None) -> None:
        self.path = Path(path)
        self.keys = keys or NameKeys()
        self._lock = threading.Lock()
        self._names: list[str] = []
        self._seen: set[str] = set()
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.path.exists():
                for line in self.path.read_text(encoding="utf-8").splitlines():
                    key = self.keys(line)
                    if key and key not in self._seen:
                        self._seen.add(key)
                        self._names.append(key)
        except OSError as exc:
            raise StoreUnavailable(f"cannot open {self.path}: {exc}") from exc

    def __contains__(self, name: str) -> bool:
        return self.keys(name) in self._seen

    def __len__(self) -> int:
        return len(self._names)

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def add(self, name: str) -> bool:
        key = self.keys(name)
        if not key:
            return False
        with self._lock:
            if key in self._seen:
                return False
            try:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(key + "\n")
            except OSError as exc:
                raise StoreUnavailable(str(exc)) from exc
            self._seen.add(key)
            self._names.append(key)
            return True


class UpsertEffect(NamedTuple):
    product: str
    seed_added: bool


def upsert(record: ProductRecord, products: ProductStore, seeds: SeedStore) -> UpsertEffect:
    return UpsertEffect(products.upsert(record), seeds.add(record.name))


# --------------------------------------------------------------------------
# extraction


def _is_actual_price(tree, path, rules: RuleSet) -> bool:
    node = resolve(tree, path)
    if node is None:
        return False
    text = normalize_space(node.text)
    for m in NUMBER_RE.finditer(text):
        if classify(NumberHit(path, m.group(), text, m.start()), tree, rules).verdict \
                is Verdict.MAYBE_ACTUAL:
            return True
    return False


def extract_products(page: CrawledPage, pairs: Iterable[PatternPair],
                     rules: RuleSet) -> tuple[str, str] | None:
    """``(name, price_text)`` from the first pair whose patterns both apply."""
    try:
        tree = parse_html(page.body)
    except EmptyDocument:
        return None
    for pair in pairs:
        name = apply_pattern(tree, pair.name_pattern)
        price = apply_pattern(tree, pair.price_pattern)
        if name is None or price is None or not name[1]:
            continue
        if _is_actual_price(tree, pair.price_pattern.steps, rules):
            return name[1], price[1]
    return None


@dataclass
class ExtractReport:
    pages: int = 0
    extracted: int = 0
    inserted: int = 0
    updated: int = 0
    unchanged: int = 0
    seeds_added: int = 0
    unparseable: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def extract_pages(pages: Iterable[CrawledPage], sites: Iterable[SiteSupport], rules: RuleSet,
                  products: ProductStore, seeds: SeedStore,
                  now: datetime | None = None) -> ExtractReport:
    pairs_by_site: dict[str, list[PatternPair]] = {}
    for s in sites:
        pairs_by_site.setdefault(s.site, []).append(s.pair)
    report = ExtractReport()
    for page in sorted(pages, key=lambda p: p.url):
        report.pages += 1
        hit = extract_products(page, pairs_by_site.get(page.site, []), rules)
        if hit is None:
            continue
        name, price_text = hit
        try:
            amount, currency = normalize_price(price_text, rules)
        except (UnparseablePrice, AmbiguousCurrency) as exc:
            log.info("skipping %s: %s", page.url, exc)
            report.unparseable += 1
            continue
        record = ProductRecord(name, amount, currency, price_text, page.url, page.site,
                               now or datetime.now(timezone.utc))
        effect = upsert(record, products, seeds)
        report.extracted += 1
        if effect.product in ("inserted", "updated", "unchanged"):
            setattr(report, effect.product, getattr(report, effect.product) + 1)
        report.seeds_added += effect.seed_added
    return report


# --------------------------------------------------------------------------
# evaluation


class Scores(NamedTuple):
    recall: float
    precision: float
    f_measure: float


def f_measure(recall: float, precision: float) -> float:
    if recall + precision == 0:
        return 0.0
    return 2 * recall * precision / (recall + precision)


def scores_from_counts(correct: int, detected: int, gold: int) -> Scores:
    if gold <= 0:
        raise EmptyGold("gold set is empty")
    recall = correct / gold
    precision = correct / detected if detected else 0.0
    return Scores(recall, precision, f_measure(recall, precision))


def _same_price(a: str, b: str, rules: RuleSet) -> bool:
    try:
        return normalize_price(a, rules) == normalize_price(b, rules)
    except (UnparseablePrice, AmbiguousCurrency):
        return normalize_space(a).casefold() == normalize_space(b).casefold()


def evaluate(predicted: Iterable[tuple[str, str, str]], gold: Iterable[tuple[str, str, str]],
             rules: RuleSet | None = None) -> Scores:
    """Score ``(url, name, price_text)`` predictions against gold triples.

    A prediction is correct when its URL has an unmatched gold entry with the
    same normalized name and the same normalized price.
    """
    rules = rules or RuleSet.default()
    remaining: dict[str, list[tuple[str, str]]] = {}
    gold_total = 0
    for url, name, price in gold:
        remaining.setdefault(url, []).append((name, price))
        gold_total += 1
    if gold_total == 0:
        raise EmptyGold("gold set is empty")
    detected = correct = 0
    for url, name, price in predicted:
        detected += 1
        for i, (gname, gprice) in enumerate(remaining.get(url, [])):
            if normalize_name(gname) == normalize_name(name) and _same_price(gprice, price, rules):
                del remaining[url][i]
                correct += 1
                break
    return scores_from_counts(correct, detected, gold_total)


def load_gold(path: str | Path) -> list[tuple[str, str, str]]:
    with open(path, encoding="utf-8") as fh:
        return [(d["url"], d["gold_name"], d["gold_price_text"])
                for d in map(json.loads, filter(str.strip, fh))]
