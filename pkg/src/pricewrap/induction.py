"""Induce a (name, price) pattern pair from one page and one seed product name."""

from __future__ import annotations

from dataclasses import dataclass

from .dom import DomNode, DomTree, NodePath, normalize_space
from .errors import BlankName
from .patterns import PatternPair, similarity
from .pricing import RuleSet, Verdict, classify_tree
from .urls import site_of


def normalize_name(name: str) -> str:
    """Whitespace collapse and case folding; diacritics are kept."""
    return normalize_space(name).casefold()


@dataclass(frozen=True)
class InductionResult:
    url: str
    site: str
    product_name: str
    name_text: str
    price_text: str
    number_text: str
    pair: PatternPair


def _find_name_leaf(tree: DomTree, product_name: str) -> DomNode | None:
    needle = normalize_name(product_name)
    if not needle:
        raise BlankName("product name is blank")
    for node in tree.leaves:
        if needle in normalize_name(node.text):
            return node
    return None


def find_name_node(tree: DomTree, product_name: str) -> NodePath | None:
    node = _find_name_leaf(tree, product_name)
    return node.path if node is not None else None


def select_price(name_path: NodePath, candidates: list[tuple[int, NodePath]],
                 index_sensitive: bool = True) -> int | None:
    """Pick among ``(document_position, path)`` candidates.

    Highest overlap with ``name_path`` wins; ties go to the longer path, then
    to the earlier candidate.  Returns the winning position.
    """
    best_key = None
    best = None
    for position, path in candidates:
        key = (similarity(name_path, path, index_sensitive), len(path), -position)
        if best_key is None or key > best_key:
            best_key, best = key, position
    return best


def induce(tree: DomTree, url: str, product_name: str, rules: RuleSet,
           index_sensitive: bool = True) -> InductionResult | None:
    name_node = _find_name_leaf(tree, product_name)
    if name_node is None:
        return None
    name_path = name_node.path

    # one candidate per leaf: its first maybe-actual number; the name leaf itself is skipped
    by_path: dict[NodePath, tuple[int, object]] = {}
    for cand in classify_tree(tree, rules):
        if cand.verdict is not Verdict.MAYBE_ACTUAL or cand.path == name_path:
            continue
        if cand.path not in by_path:
            by_path[cand.path] = (len(by_path), cand)
    if not by_path:
        return None
    winner = select_price(name_path, [(pos, path) for path, (pos, _) in by_path.items()],
                          index_sensitive)
    chosen = next(c for pos, c in by_path.values() if pos == winner)
    return InductionResult(
        url=url,
        site=site_of(url),
        product_name=product_name,
        name_text=normalize_space(name_node.text),
        price_text=chosen.raw_text,
        number_text=chosen.number_text,
        pair=PatternPair.from_paths(name_path, chosen.path),
    )
