import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pricewrap.corpus import NOKIA1200_PAGE
from pricewrap.dom import NodePath, PathStep, parse_html
from pricewrap.patterns import PatternPair, Role, XpathPattern, apply_pattern, similarity

WORKED_NAME = NodePath.parse("HTML -> BODY -> TABLE -> TR -> TD -> DIV[1]")
WORKED_PRICE = NodePath.parse("HTML -> BODY -> TABLE -> TR -> TD -> DIV[2] -> FONT")


def test_worked_example_overlap():
    assert similarity(WORKED_NAME, WORKED_PRICE) == 5


def test_identity_and_early_divergence():
    assert similarity(WORKED_PRICE, WORKED_PRICE) == len(WORKED_PRICE) == 7
    assert similarity(NodePath.parse("HTML -> BODY"), NodePath.parse("HTML -> HEAD")) == 1
    assert similarity(NodePath.parse("HTML -> BODY"), NodePath.parse("DIV")) == 0


def test_index_insensitive_variant():
    a = NodePath.parse("HTML -> BODY -> TABLE[1] -> TR[1] -> TD[1]")
    b = NodePath.parse("HTML -> BODY -> TABLE[1] -> TR[2] -> TD[2]")
    assert similarity(a, b) == 3
    assert similarity(a, b, index_sensitive=False) == 5


def test_pattern_text_forms():
    pair = PatternPair.from_paths(
        NodePath.parse("HTML -> BODY -> TABLE[1] -> TR[1] -> TD[1]"),
        NodePath.parse("HTML -> BODY -> TABLE[1] -> TR[2] -> TD[2]"))
    assert pair.key == (
        "HTML[1] -> BODY[1] -> TABLE[1] -> TR[1] -> TD[1] -> product_name",
        "HTML[1] -> BODY[1] -> TABLE[1] -> TR[2] -> TD[2] -> actual_product_price")
    assert PatternPair.from_dict(pair.to_dict()) == pair
    assert XpathPattern.parse(str(pair.name_pattern)) == pair.name_pattern


def test_pair_roles_enforced():
    p = XpathPattern(WORKED_NAME, Role.PRODUCT_NAME)
    with pytest.raises(ValueError):
        PatternPair(p, p)
    with pytest.raises(ValueError):
        XpathPattern.parse("HTML -> BODY")  # "BODY" is not a role
    with pytest.raises(ValueError):
        XpathPattern(NodePath(()), Role.PRODUCT_NAME)


# --------------------------------------------------------------------------
# applying patterns across pages of one template

TEMPLATE = """<html><body><div class="top">Shop</div>
<div class="box"><h1>{name}</h1><p>Mô tả</p><div><font>{price}</font></div></div>
</body></html>"""
OTHER = """<html><body><table><tr><td><h1>{name}</h1></td></tr></table></body></html>"""

NAME_PATTERN = XpathPattern(NodePath.parse("HTML -> BODY -> DIV[2] -> H1"), Role.PRODUCT_NAME)
PRICE_PATTERN = XpathPattern(NodePath.parse("HTML -> BODY -> DIV[2] -> DIV[1] -> FONT"),
                             Role.ACTUAL_PRODUCT_PRICE)


def test_apply_on_source_and_sibling_page():
    a = parse_html(TEMPLATE.format(name="Nokia 1200", price="VNĐ 540.000"))
    b = parse_html(TEMPLATE.format(name="Nokia 6300 silver", price="VNĐ 2.150.000"))
    assert apply_pattern(a, NAME_PATTERN)[1] == "Nokia 1200"
    assert apply_pattern(b, NAME_PATTERN)[1] == "Nokia 6300 silver"
    assert apply_pattern(b, PRICE_PATTERN)[1] == "VNĐ 2.150.000"


def test_apply_on_other_template():
    c = parse_html(OTHER.format(name="Nokia 1200"))
    assert apply_pattern(c, NAME_PATTERN) is None


def test_apply_on_nokia_page():
    tree = parse_html(NOKIA1200_PAGE)
    price = XpathPattern.parse(
        "HTML[1] -> BODY[1] -> TABLE[1] -> TR[2] -> TD[2] -> actual_product_price")
    assert apply_pattern(tree, price)[1] == "VNĐ 540.000"


# --------------------------------------------------------------------------
# properties, with os.path.commonprefix as the reference overlap

steps = st.builds(PathStep, st.sampled_from(["html", "body", "div", "td", "tr"]),
                  st.integers(1, 3))
paths = st.lists(steps, max_size=8).map(lambda s: NodePath(tuple(s)))


@given(paths, paths)
def test_similarity_properties(a, b):
    s = similarity(a, b)
    assert s == similarity(b, a)
    assert s == len(os.path.commonprefix([list(a.steps), list(b.steps)]))
    assert s <= min(len(a), len(b))
    is_prefix = a.steps[:len(b)] == b.steps or b.steps[:len(a)] == a.steps
    assert (s == min(len(a), len(b))) == is_prefix


@given(paths, paths)
def test_index_insensitive_dominates(a, b):
    assert similarity(a, b, index_sensitive=False) >= similarity(a, b)
