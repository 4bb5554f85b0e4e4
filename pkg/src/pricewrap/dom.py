"""Tolerant HTML parsing into a small DOM with per-tag sibling indices.

The tree is built on top of :class:`html.parser.HTMLParser` with a handful of
repair rules borrowed from how browsers recover from sloppy markup:

* ``html``/``head``/``body`` are synthesized when missing;
* ``p``, ``li``, ``td``, ``tr``, ``option`` ... are implicitly closed by a
  sibling start tag;
* a formatting element (``b``, ``font`` ...) that is never closed does not
  swallow a following element of the same tag;
* an end tag closes every element still open below its match, and end tags
  without a match are ignored.

Every element records its 1-based index among same-tag siblings so that any
node can be addressed by a path such as ``HTML[1] -> BODY[1] -> TABLE[1]``.
"""

from __future__ import annotations

import codecs
import re
import unicodedata
from dataclasses import dataclass
from functools import cached_property
from html.parser import HTMLParser
from typing import Iterator, NamedTuple

from .errors import EmptyDocument

VOID_TAGS = frozenset({
    "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame", "hr",
    "img", "input", "keygen", "link", "meta", "param", "source", "track", "wbr",
})
DROPPED_TAGS = frozenset({"script", "style"})
HEAD_TAGS = frozenset({"title", "meta", "link", "base"})
FORMATTING_TAGS = frozenset({
    "b", "big", "code", "em", "font", "i", "nobr", "s", "small", "strike",
    "strong", "tt", "u",
})
_P_CLOSERS = frozenset({
    "address", "article", "aside", "blockquote", "center", "details", "dialog",
    "dir", "div", "dl", "fieldset", "figcaption", "figure", "footer", "form",
    "h1", "h2", "h3", "h4", "h5", "h6", "header", "hgroup", "hr", "li", "dd",
    "dt", "main", "menu", "nav", "ol", "p", "pre", "section", "summary",
    "table", "ul",
})
_TABLE_SCOPE = frozenset({"table", "td", "th", "caption", "html"})

# new tag -> (open tags it implicitly closes, tags that stop the search)
_IMPLIED_CLOSE: dict[str, tuple[frozenset, frozenset]] = {
    "li": (frozenset({"li"}), frozenset({"ul", "ol", "menu"}) | _TABLE_SCOPE),
    "dt": (frozenset({"dt", "dd"}), frozenset({"dl"}) | _TABLE_SCOPE),
    "dd": (frozenset({"dt", "dd"}), frozenset({"dl"}) | _TABLE_SCOPE),
    "tr": (frozenset({"tr", "td", "th"}),
           frozenset({"table", "tbody", "thead", "tfoot", "html"})),
    "td": (frozenset({"td", "th"}), frozenset({"tr", "table", "html"})),
    "th": (frozenset({"td", "th"}), frozenset({"tr", "table", "html"})),
    "thead": (frozenset({"thead", "tbody", "tfoot", "tr", "td", "th"}),
              frozenset({"table", "html"})),
    "tbody": (frozenset({"thead", "tbody", "tfoot", "tr", "td", "th"}),
              frozenset({"table", "html"})),
    "tfoot": (frozenset({"thead", "tbody", "tfoot", "tr", "td", "th"}),
              frozenset({"table", "html"})),
    "option": (frozenset({"option"}), frozenset({"select", "datalist", "html"})),
    "optgroup": (frozenset({"option", "optgroup"}), frozenset({"select", "html"})),
    "a": (frozenset({"a"}), _TABLE_SCOPE),
}
_P_SCOPE = frozenset({"button", "object", "applet", "marquee"}) | _TABLE_SCOPE

_META_CHARSET = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_:.\-]+)""", re.IGNORECASE
)


def normalize_space(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim."""
    return " ".join(text.split())


class PathStep(NamedTuple):
    tag: str
    index: int

    def __str__(self) -> str:
        return f"{self.tag.upper()}[{self.index}]"


_STEP_RE = re.compile(r"^\s*([A-Za-z][A-Za-z0-9:_-]*)\s*(?:\[\s*(\d+)\s*\])?\s*$")


@dataclass(frozen=True)
class NodePath:
    """Root-to-node chain of :class:`PathStep`."""

    steps: tuple[PathStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[PathStep]:
        return iter(self.steps)

    def __getitem__(self, item):
        return self.steps[item]

    def __str__(self) -> str:
        return " -> ".join(str(step) for step in self.steps)

    @classmethod
    def parse(cls, text: str) -> NodePath:
        """Parse ``"HTML[1] -> BODY[1] -> TD[2]"``; ``→`` is accepted as separator and a
        missing index reads as 1."""
        parts = re.split(r"\s*(?:->|→)\s*", text.strip())
        steps = []
        for part in parts:
            m = _STEP_RE.match(part)
            if not m:
                raise ValueError(f"bad path step {part!r} in {text!r}")
            steps.append(PathStep(m.group(1).lower(), int(m.group(2) or 1)))
        if not steps:
            raise ValueError("empty path")
        return cls(tuple(steps))


class DomNode:
    """An element. Text is stored on the element; there are no text-node objects."""

    __slots__ = ("tag", "attributes", "children", "text", "lead", "tail", "parent", "index")

    def __init__(self, tag: str, attributes: dict[str, str] | None = None,
                 parent: DomNode | None = None) -> None:
        self.tag = tag
        self.attributes = attributes or {}
        self.children: list[DomNode] = []
        self.text = ""  # all direct text, concatenated
        self.lead = ""  # direct text before the first child
        self.tail = ""  # text after this element, owned by the parent
        self.parent = parent
        self.index = 1

    def __repr__(self) -> str:
        return f"<{self.tag}[{self.index}] {normalize_space(self.text)[:30]!r}>"

    @property
    def path(self) -> NodePath:
        return path_of(self)

    def iter(self) -> Iterator[DomNode]:
        """Preorder (document order) traversal starting at this node."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def ancestors(self, include_self: bool = False) -> Iterator[DomNode]:
        node = self if include_self else self.parent
        while node is not None:
            yield node
            node = node.parent


class DomTree:
    """A parsed document. Treat as immutable once returned by :func:`parse_html`."""

    def __init__(self, root: DomNode, encoding: str = "utf-8") -> None:
        self.root = root
        self.encoding = encoding

    def iter_nodes(self) -> Iterator[DomNode]:
        return self.root.iter()

    @cached_property
    def leaves(self) -> list[DomNode]:
        """Text-bearing leaf elements of the rendered document, in document order.

        Subtrees under ``head`` are skipped since they are not rendered.
        """
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.tag == "head":
                continue
            if node.children:
                stack.extend(reversed(node.children))
            elif node.text and not node.text.isspace():
                out.append(node)
        return out

    @cached_property
    def _leaf_positions(self) -> dict[int, int]:
        return {id(node): i for i, node in enumerate(self.leaves)}

    def leaf_position(self, node: DomNode) -> int | None:
        return self._leaf_positions.get(id(node))

    @cached_property
    def text_runs(self) -> list[tuple[DomNode, str]]:
        """Non-blank rendered text runs in document order, whitespace-normalized.

        A run is an element's text before its first child, or the text after a
        child element.  Each leaf contributes exactly one run (its own text).
        """
        runs: list[tuple[DomNode, str]] = []
        stack: list[tuple[DomNode, bool]] = [(self.root, False)]
        while stack:
            node, is_tail = stack.pop()
            if is_tail:
                text = normalize_space(node.tail)
                if text:
                    runs.append((node.parent, text))
                continue
            if node.tag == "head":
                continue
            text = normalize_space(node.lead)
            if text:
                runs.append((node, text))
            for child in reversed(node.children):
                stack.append((child, True))
                stack.append((child, False))
        return runs

    @cached_property
    def _leaf_runs(self) -> dict[int, int]:
        return {id(node): i for i, (node, _) in enumerate(self.text_runs) if not node.children}

    def neighbor_texts(self, node: DomNode) -> tuple[str | None, str | None]:
        """Texts of the runs just before and after ``node``'s own run."""
        i = self._leaf_runs.get(id(node))
        if i is None:
            return None, None
        runs = self.text_runs
        prev_text = runs[i - 1][1] if i > 0 else None
        next_text = runs[i + 1][1] if i + 1 < len(runs) else None
        return prev_text, next_text

    def leaf_text_nodes(self) -> list[tuple[NodePath, str]]:
        return [(path_of(node), normalize_space(node.text)) for node in self.leaves]

    def resolve(self, path: NodePath) -> DomNode | None:
        return resolve(self, path)


def path_of(node: DomNode) -> NodePath:
    steps = [PathStep(n.tag, n.index) for n in node.ancestors(include_self=True)]
    steps.reverse()
    return NodePath(tuple(steps))


def resolve(tree: DomTree, path: NodePath) -> DomNode | None:
    """Follow ``path`` from the root; ``None`` when any step has no match."""
    if not len(path):
        return None
    first = path[0]
    node = tree.root
    if node.tag != first.tag or node.index != first.index:
        return None
    for step in path.steps[1:]:
        for child in node.children:
            if child.tag == step.tag and child.index == step.index:
                node = child
                break
        else:
            return None
    return node


def leaf_text_nodes(tree: DomTree) -> list[tuple[NodePath, str]]:
    return tree.leaf_text_nodes()


# --------------------------------------------------------------------------
# decoding


def decode_document(document: bytes, declared_encoding: str | None = None) -> tuple[str, str]:
    """Return ``(text, encoding)``: declared encoding, else meta charset, else UTF-8."""
    candidates = []
    if declared_encoding:
        candidates.append(declared_encoding)
    m = _META_CHARSET.search(document[:4096])
    if m:
        candidates.append(m.group(1).decode("ascii", "replace"))
    candidates.append("utf-8")
    for name in candidates:
        try:
            codec = codecs.lookup(name).name
        except LookupError:
            continue
        text = document.decode(codec, errors="replace")
        return text.lstrip("﻿"), codec
    raise AssertionError("unreachable")  # pragma: no cover


# --------------------------------------------------------------------------
# tree construction


class _Tokenizer(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.events: list[tuple] = []

    def handle_starttag(self, tag, attrs):
        self.events.append(("start", tag, attrs))

    def handle_startendtag(self, tag, attrs):
        self.events.append(("start", tag, attrs))
        if tag not in VOID_TAGS:
            self.events.append(("end", tag))

    def handle_endtag(self, tag):
        self.events.append(("end", tag))

    def handle_data(self, data):
        self.events.append(("data", data))


def _unclosed_starts(events: list[tuple]) -> set[int]:
    """Event indices of formatting start tags that never receive an end tag."""
    open_by_tag: dict[str, list[int]] = {}
    for i, ev in enumerate(events):
        if ev[1] not in FORMATTING_TAGS:
            continue
        if ev[0] == "start":
            open_by_tag.setdefault(ev[1], []).append(i)
        elif ev[0] == "end" and open_by_tag.get(ev[1]):
            open_by_tag[ev[1]].pop()
    return {i for starts in open_by_tag.values() for i in starts}


class _Builder:
    def __init__(self) -> None:
        self.root = DomNode("html")
        self.stack: list[DomNode] = [self.root]
        self.head: DomNode | None = None
        self.body: DomNode | None = None
        self.unclosed_nodes: set[int] = set()
        self.skip: str | None = None
        self.saw_content = False

    @property
    def current(self) -> DomNode:
        return self.stack[-1]

    def _append(self, tag: str, attrs: dict[str, str]) -> DomNode:
        node = DomNode(tag, attrs, self.current)
        self.current.children.append(node)
        return node

    def _pop_to(self, depth: int) -> None:
        del self.stack[depth:]

    def _ensure_body(self, attrs: dict[str, str] | None = None) -> None:
        if self.body is None:
            self._pop_to(1)
            self.body = self._append("body", attrs or {})
            self.stack.append(self.body)

    def _ensure_head(self) -> None:
        if self.head is None:
            self._pop_to(1)
            self.head = self._append("head", {})
            self.stack.append(self.head)
        elif self.head not in self.stack:
            self._pop_to(1)
            self.stack.append(self.head)

    def _close_implied(self, tag: str) -> None:
        rule = _IMPLIED_CLOSE.get(tag)
        if tag in _P_CLOSERS:
            self._close_search(frozenset({"p"}), _P_SCOPE)
        if rule:
            self._close_search(*rule)

    def _close_search(self, targets: frozenset, boundary: frozenset) -> None:
        found = None
        for depth in range(len(self.stack) - 1, 0, -1):
            tag = self.stack[depth].tag
            if tag in targets:
                found = depth
            elif tag in boundary:
                break
        if found is not None:
            self._pop_to(found)

    def start(self, tag: str, attrs: list, unclosed: bool) -> None:
        attr_map = {k: (v if v is not None else "") for k, v in attrs}
        if tag == "html":
            for k, v in attr_map.items():
                self.root.attributes.setdefault(k, v)
            return
        if tag == "head":
            if self.head is None and self.body is None:
                self._ensure_head()
                self.head.attributes.update(attr_map)
            return
        if tag == "body":
            if self.body is None:
                self._ensure_body(attr_map)
            else:
                for k, v in attr_map.items():
                    self.body.attributes.setdefault(k, v)
            return
        self.saw_content = True
        if tag in DROPPED_TAGS:
            self.skip = tag
            return
        if self.body is None and tag in HEAD_TAGS:
            self._ensure_head()
        else:
            self._ensure_body()
            self._close_implied(tag)
            top = self.current
            if tag in FORMATTING_TAGS and top.tag == tag and id(top) in self.unclosed_nodes:
                self.stack.pop()
        node = self._append(tag, attr_map)
        if tag not in VOID_TAGS:
            self.stack.append(node)
            if unclosed:
                self.unclosed_nodes.add(id(node))

    def end(self, tag: str) -> None:
        if self.skip is not None:
            if tag == self.skip:
                self.skip = None
            return
        if tag in ("html", "body"):
            return
        if tag == "head":
            if self.head is not None and self.head in self.stack:
                self._pop_to(self.stack.index(self.head))
            return
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                self._pop_to(depth)
                return

    def data(self, text: str) -> None:
        if self.skip is not None:
            return
        if text.isspace() or not text:
            if self.body is None and self.current.tag not in HEAD_TAGS:
                return
        else:
            self.saw_content = True
            if self.body is None and self.current.tag not in HEAD_TAGS:
                self._ensure_body()
        cur = self.current
        cur.text += text
        if cur.children:
            cur.children[-1].tail += text
        else:
            cur.lead += text


def _assign_indices(root: DomNode) -> None:
    for node in root.iter():
        counts: dict[str, int] = {}
        for child in node.children:
            counts[child.tag] = counts.get(child.tag, 0) + 1
            child.index = counts[child.tag]


def parse_html(document: bytes | str, declared_encoding: str | None = None) -> DomTree:
    """Parse raw HTML into a :class:`DomTree`.

    Raises :class:`EmptyDocument` when nothing but whitespace, comments or
    doctype survives parsing.
    """
    if isinstance(document, bytes):
        text, encoding = decode_document(document, declared_encoding)
    else:
        text, encoding = document, "utf-8"
    text = unicodedata.normalize("NFC", text)
    tokenizer = _Tokenizer()
    tokenizer.feed(text)
    tokenizer.close()
    events = tokenizer.events
    unclosed = _unclosed_starts(events)

    builder = _Builder()
    for i, ev in enumerate(events):
        kind = ev[0]
        if kind == "start":
            if builder.skip is None:
                builder.start(ev[1], ev[2], i in unclosed)
        elif kind == "end":
            builder.end(ev[1])
        else:
            builder.data(ev[1])
    if not builder.saw_content:
        raise EmptyDocument("document has no element content")
    _assign_indices(builder.root)
    return DomTree(builder.root, encoding)
