"""Number detection and rule-based price classification.

A number is any run of digit groups joined by single ``.`` or ``,``
characters (``1200``, ``540.000``, ``1,299.99``).  Each number is classified
by looking at a context window made of its own leaf plus the nearest
preceding and following text runs (for leaf-only markup these are the
neighbouring leaves), clipped to :data:`WINDOW` characters on each side.
Markers bind to the nearest number: text before a number is only considered
back to the previous number, and text after it only up to the next number.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

from .dom import DomTree, NodePath, normalize_space, resolve
from .errors import ConfigError

WINDOW = 40
NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)*")
_TRAILING_SEPARATORS = re.compile(r"[\W_]+$")
# a marker must not touch a letter on either outer side
_LEFT_EDGE = r"(?<![^\W\d_])"
_RIGHT_EDGE = r"(?![^\W\d_])"


class Verdict(str, Enum):
    MAYBE_ACTUAL = "maybe_actual"
    EXCLUDED_MARKER = "excluded_marker"
    EXCLUDED_TAG = "excluded_tag"
    NOT_PRICE = "not_price"


def fold_text(text: str) -> str:
    return unicodedata.normalize("NFC", text).casefold()


def _marker_alternation(markers: Iterable[str]) -> str:
    folded = sorted({fold_text(m) for m in markers if m.strip()}, key=len, reverse=True)
    return "|".join(re.escape(m) for m in folded)


def marker_pattern(markers: Iterable[str]) -> re.Pattern | None:
    """Regex finding any of ``markers`` in casefolded text, not glued to a letter."""
    alt = _marker_alternation(markers)
    return re.compile(f"{_LEFT_EDGE}(?:{alt}){_RIGHT_EDGE}") if alt else None


@dataclass(frozen=True)
class RuleSet:
    prefix_markers: tuple[str, ...]
    suffix_markers: tuple[str, ...]
    excluding_markers: tuple[str, ...]
    excluding_tags: frozenset[str]

    @classmethod
    def from_dict(cls, data: dict) -> RuleSet:
        missing = [k for k in ("prefix_markers", "suffix_markers", "excluding_markers",
                               "excluding_tags") if k not in data]
        if missing:
            raise ConfigError(f"rules missing keys: {', '.join(missing)}")
        for key in ("prefix_markers", "suffix_markers", "excluding_markers", "excluding_tags"):
            if not isinstance(data[key], list) or not all(isinstance(v, str) for v in data[key]):
                raise ConfigError(f"rules key {key!r} must be a list of strings")
        return cls(
            prefix_markers=tuple(data["prefix_markers"]),
            suffix_markers=tuple(data["suffix_markers"]),
            excluding_markers=tuple(data["excluding_markers"]),
            excluding_tags=frozenset(t.lower() for t in data["excluding_tags"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> RuleSet:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"rules file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"rules file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def default(cls) -> RuleSet:
        text = resources.files("pricewrap").joinpath("data/rules_vi.json").read_text("utf-8")
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict[str, list[str]]:
        return {
            "prefix_markers": list(self.prefix_markers),
            "suffix_markers": list(self.suffix_markers),
            "excluding_markers": list(self.excluding_markers),
            "excluding_tags": sorted(self.excluding_tags),
        }

    @cached_property
    def prefix_re(self) -> re.Pattern | None:
        return marker_pattern(self.prefix_markers)

    @cached_property
    def suffix_re(self) -> re.Pattern | None:
        return marker_pattern(self.suffix_markers)

    @cached_property
    def excluding_re(self) -> re.Pattern | None:
        return marker_pattern(self.excluding_markers)

    @cached_property
    def tail_marker_re(self) -> re.Pattern | None:
        alt = _marker_alternation(self.prefix_markers + self.suffix_markers
                                  + self.excluding_markers)
        return re.compile(f"{_LEFT_EDGE}(?:{alt})$") if alt else None


class NumberHit(NamedTuple):
    path: NodePath
    number_text: str
    text: str
    start: int


@dataclass(frozen=True)
class PriceCandidate:
    path: NodePath
    raw_text: str
    number_text: str
    verdict: Verdict
    start: int = 0


def find_numbers(text: str) -> list[re.Match]:
    return list(NUMBER_RE.finditer(text))


def detect_numbers(leaves: Iterable[tuple[NodePath, str]]) -> list[NumberHit]:
    hits = []
    for path, text in leaves:
        for m in NUMBER_RE.finditer(text):
            hits.append(NumberHit(path, m.group(), text, m.start()))
    return hits


def _has(pattern: re.Pattern | None, text: str) -> bool:
    return pattern is not None and pattern.search(text) is not None


def _strip_attached(text: str, rules: RuleSet) -> str:
    """Drop separators and markers at the end of casefolded ``text``; they belong
    to the number that follows."""
    tail = rules.tail_marker_re
    while True:
        stripped = _TRAILING_SEPARATORS.sub("", text)
        if tail is not None:
            m = tail.search(stripped)
            if m:
                stripped = stripped[:m.start()]
        if stripped == text:
            return text
        text = stripped


def _windows(prev_text: str | None, text: str, next_text: str | None, start: int, end: int,
             rules: RuleSet) -> tuple[str, str, str]:
    """Context around ``text[start:end]``: (before, after, after within the same leaf).

    ``before`` reaches back into the preceding run but stops at the previous
    number.  ``after`` stops at the next number in the same leaf, dropping the
    markers attached to it; without one it extends into the following run,
    unless that run holds a number (its text then prefixes that number).
    """
    before = ((prev_text + " ") if prev_text else "") + text[:start]
    numbers = find_numbers(before)
    if numbers:
        before = before[numbers[-1].end():]
    rest = fold_text(text[end:])
    nxt = NUMBER_RE.search(rest)
    if nxt:
        between = rest[:nxt.start()]
        same_leaf = after = _strip_attached(between, rules)
        # a suffix directly after this number stays with it
        lead = len(between) - len(between.lstrip())
        m = rules.suffix_re.match(between, lead) if rules.suffix_re is not None else None
        if m and len(after) < m.end():
            after = between[:m.end()]
    else:
        same_leaf = after = rest
        if next_text and not NUMBER_RE.search(next_text):
            after = rest + " " + next_text
    return before[-WINDOW:], after[:WINDOW], same_leaf[:WINDOW]


def _verdict(before: str, after: str, same_leaf: str, rules: RuleSet) -> Verdict:
    before, after, same_leaf = fold_text(before), fold_text(after), fold_text(same_leaf)
    if _has(rules.excluding_re, before) or _has(rules.excluding_re, same_leaf):
        return Verdict.EXCLUDED_MARKER
    if _has(rules.prefix_re, before) or _has(rules.suffix_re, after):
        return Verdict.MAYBE_ACTUAL
    return Verdict.NOT_PRICE


def _classify_at(tree: DomTree, node, path: NodePath, text: str, number_text: str,
                 start: int, rules: RuleSet) -> PriceCandidate:
    if node is not None and any(a.tag in rules.excluding_tags
                                for a in node.ancestors(include_self=True)):
        return PriceCandidate(path, text, number_text, Verdict.EXCLUDED_TAG, start)
    prev_text, next_text = tree.neighbor_texts(node) if node is not None else (None, None)
    before, after, same_leaf = _windows(prev_text, text, next_text, start,
                                        start + len(number_text), rules)
    return PriceCandidate(path, text, number_text, _verdict(before, after, same_leaf, rules),
                          start)


def classify(candidate, tree: DomTree, rules: RuleSet) -> PriceCandidate:
    """Classify one detected number.

    ``candidate`` is a :class:`NumberHit` or a ``(path, text, number_text)``
    triple; for a triple the first occurrence of ``number_text`` is used.
    """
    if isinstance(candidate, NumberHit):
        path, number_text, text, start = candidate
    else:
        path, text, number_text = candidate
        start = next((m.start() for m in NUMBER_RE.finditer(text) if m.group() == number_text),
                     text.find(number_text))
        if start < 0:
            raise ValueError(f"{number_text!r} does not occur in {text!r}")
    node = resolve(tree, path)
    return _classify_at(tree, node, path, text, number_text, start, rules)


def classify_tree(tree: DomTree, rules: RuleSet) -> list[PriceCandidate]:
    """Detect and classify every number in the tree's leaves, in document order."""
    out = []
    for node in tree.leaves:
        text = normalize_space(node.text)
        path = None
        for m in NUMBER_RE.finditer(text):
            if path is None:
                path = node.path
            out.append(_classify_at(tree, node, path, text, m.group(), m.start(), rules))
    return out
