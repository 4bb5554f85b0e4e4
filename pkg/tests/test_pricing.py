import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pricewrap.corpus import NOKIA1200_PAGE
from pricewrap.dom import parse_html
from pricewrap.errors import ConfigError
from pricewrap.pricing import RuleSet, Verdict, classify, classify_tree, detect_numbers

RULES = RuleSet.default()


def scan_numbers(text: str) -> list[str]:
    """Character-scan reference for the number grammar: digit runs joined by
    single '.' or ',' separators, matched greedily."""
    out, i, n = [], 0, len(text)
    while i < n:
        if not text[i].isdigit():
            i += 1
            continue
        j = i
        while j < n and text[j].isdigit():
            j += 1
        while j + 1 < n and text[j] in ".," and text[j + 1].isdigit():
            j += 1
            while j < n and text[j].isdigit():
                j += 1
        out.append(text[i:j])
        i = j
    return out


def verdicts(doc: str) -> dict[str, Verdict]:
    tree = parse_html(doc)
    return {c.number_text: c.verdict for c in classify_tree(tree, RULES)}


def one(text: str) -> Verdict:
    got = verdicts(f"<html><body><p>{text}</p></body></html>")
    assert len(got) == 1, got
    return next(iter(got.values()))


# --------------------------------------------------------------------------
# detection


def test_nokia_page_numbers():
    tree = parse_html(NOKIA1200_PAGE)
    assert [h.number_text for h in detect_numbers(tree.leaf_text_nodes())] == [
        "1200", "590.000", "540.000", "100.000"]


def test_no_digits():
    assert detect_numbers([(None, "no digits here")]) == []


def test_maximal_munch():
    assert [h.number_text for h in detect_numbers([(None, "12.345.678")])] == ["12.345.678"]


@given(st.text(alphabet="0123456789.,- aĐ$", max_size=40))
def test_detection_matches_character_scan(text):
    assert [h.number_text for h in detect_numbers([(None, text)])] == scan_numbers(text)


# --------------------------------------------------------------------------
# classification


def test_nokia_page_verdicts():
    assert verdicts(NOKIA1200_PAGE) == {
        "1200": Verdict.NOT_PRICE,
        "590.000": Verdict.EXCLUDED_TAG,
        "540.000": Verdict.MAYBE_ACTUAL,
        "100.000": Verdict.EXCLUDED_MARKER,
    }


def test_classify_single_candidate_by_triple():
    tree = parse_html(NOKIA1200_PAGE)
    leaves = dict((t, p) for p, t in tree.leaf_text_nodes())
    cand = classify((leaves["VNĐ 540.000"], "VNĐ 540.000", "540.000"), tree, RULES)
    assert cand.verdict is Verdict.MAYBE_ACTUAL
    cand = classify((leaves["Nokia 1200"], "Nokia 1200", "1200"), tree, RULES)
    assert cand.verdict is Verdict.NOT_PRICE
    with pytest.raises(ValueError):
        classify((leaves["Nokia 1200"], "Nokia 1200", "999"), tree, RULES)


@pytest.mark.parametrize("text,verdict", [
    ("VNĐ 540.000", Verdict.MAYBE_ACTUAL),
    ("vnđ 540.000", Verdict.MAYBE_ACTUAL),
    ("540.000 VNĐ", Verdict.MAYBE_ACTUAL),
    ("540.000 đ", Verdict.MAYBE_ACTUAL),
    ("Giá: 540.000", Verdict.MAYBE_ACTUAL),
    ("199 $", Verdict.MAYBE_ACTUAL),
    ("$199", Verdict.NOT_PRICE),  # "$" is a suffix marker only in the shipped set
    ("1,299 USD", Verdict.MAYBE_ACTUAL),
    ("1200", Verdict.NOT_PRICE),
    ("Model 1200 Điện thoại", Verdict.NOT_PRICE),  # "Đ" inside a word is not a marker
    ("Mã số 54 trong kho", Verdict.NOT_PRICE),
    ("Giá cũ: 590.000 VNĐ", Verdict.EXCLUDED_MARKER),
    ("Giá thị trường 600.000 VNĐ", Verdict.EXCLUDED_MARKER),
    ("Tiết kiệm: VNĐ 100.000", Verdict.EXCLUDED_MARKER),
    ("VNĐ 100.000 tiết kiệm", Verdict.EXCLUDED_MARKER),
])
def test_single_leaf_verdicts(text, verdict):
    assert one(text) is verdict


def test_markers_bind_to_nearest_number():
    got = verdicts("<p>Giá cũ: 590.000 VNĐ Giá: 540.000 VNĐ</p>")
    assert got == {"590.000": Verdict.EXCLUDED_MARKER, "540.000": Verdict.MAYBE_ACTUAL}
    got = verdicts("<p>540.000 VNĐ Tiết kiệm 100.000 VNĐ</p>")
    assert got == {"540.000": Verdict.MAYBE_ACTUAL, "100.000": Verdict.EXCLUDED_MARKER}


def test_context_crosses_into_neighbor_runs():
    assert verdicts("<div>Giá: <b>540.000</b></div>")["540.000"] is Verdict.MAYBE_ACTUAL
    assert verdicts("<div><b>540.000</b> VNĐ</div>")["540.000"] is Verdict.MAYBE_ACTUAL
    assert verdicts("<div>Giá cũ <b>590.000</b></div>")["590.000"] is Verdict.EXCLUDED_MARKER


def test_both_strike_tags():
    assert verdicts("<p><s>VNĐ 1.000</s> <strike>2.000 VNĐ</strike></p>") == {
        "1.000": Verdict.EXCLUDED_TAG, "2.000": Verdict.EXCLUDED_TAG}


def test_custom_rules_add_prefix():
    rules = RuleSet.from_dict(RULES.to_dict() | {"prefix_markers": ["Giá", "VNĐ", "$"]})
    tree = parse_html("<p>$199</p>")
    assert classify_tree(tree, rules)[0].verdict is Verdict.MAYBE_ACTUAL


MARKED = st.sampled_from(["VNĐ {n}", "{n} VNĐ", "Giá {n}", "{n} đ", "{n} $", "{n}"])
NUMS = st.from_regex(r"[1-9][0-9]{0,2}(\.[0-9]{3}){0,2}", fullmatch=True)


@given(MARKED, NUMS, st.sampled_from(["strike", "s"]))
def test_tag_exclusion_dominates(fmt, number, tag):
    doc = f"<div><{tag}><span>{fmt.format(n=number)}</span></{tag}></div>"
    assert set(verdicts(doc).values()) == {Verdict.EXCLUDED_TAG}


@given(MARKED, NUMS, st.sampled_from(RULES.excluding_markers))
def test_marker_exclusion_dominates(fmt, number, marker):
    text = f"{marker}: {fmt.format(n=number)}"
    assert one(text) is Verdict.EXCLUDED_MARKER


# --------------------------------------------------------------------------
# rule files


def test_rules_round_trip(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(json.dumps(RULES.to_dict(), ensure_ascii=False), encoding="utf-8")
    assert RuleSet.load(path) == RULES


def test_default_rules_content():
    assert "VNĐ" in RULES.prefix_markers and "Giá" in RULES.prefix_markers
    assert "Tiết kiệm" in RULES.excluding_markers
    assert {"strike", "s"} <= RULES.excluding_tags


def test_rules_errors(tmp_path):
    with pytest.raises(ConfigError):
        RuleSet.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"prefix": ["Giá"]}', encoding="utf-8")
    with pytest.raises(ConfigError):
        RuleSet.load(bad)
