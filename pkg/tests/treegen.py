"""Random product-page trees with planted name, price and decoy leaves.

The generator keeps its own model of the tree, so the reference answer
(paths, depths, common ancestors, document order) never goes through the
parser or the induction code under test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from pricewrap.dom import NodePath, normalize_space
from pricewrap.induction import normalize_name
from pricewrap.pricing import NUMBER_RE, NumberHit, RuleSet, Verdict, classify

CONTAINERS = ["div", "section", "article", "aside", "span"]
LEAF_TAGS = ["span", "font", "p", "h2", "em", "div"]
FILLERS = ["Mô tả sản phẩm", "Bảo hành chính hãng", "Xem thêm", "Liên hệ", "Hàng mới về",
           "Thông số kỹ thuật", "Chia sẻ", "Bình luận", "Màu đen", "Còn hàng"]
NAMES = ["Nokia 1200", "Nokia e71 white steel", "Nokia 6300 silver", "Canon PowerShot G10",
         "Lenovo Thinkpad t61", "Samsung Galaxy S"]
PRICE_FORMATS = ["VNĐ {n}", "Giá: {n}", "Giá {n} VNĐ", "{n} VNĐ", "{n} đ", "{n} USD"]
PREFIX_ONLY_FORMATS = ["VNĐ {n}", "Giá: {n}", "Giá bán: VNĐ {n}"]
MARKER_DECOYS = ["Giá cũ: {n} VNĐ", "Tiết kiệm: VNĐ {n}", "Giá thị trường VNĐ {n}"]
LOCAL_MARKER_DECOYS = ["Giá cũ: VNĐ {n}", "Tiết kiệm: VNĐ {n}", "Giá thị trường VNĐ {n}"]
BARE = ["Mã {n}", "{n} lượt xem", "Model {n}"]


def amount(rng: random.Random) -> str:
    n = rng.randrange(10, 9000) * 1000
    return f"{n:,}".replace(",", ".")


@dataclass(eq=False)
class Node:
    tag: str
    text: str = ""
    children: list[Node] = field(default_factory=list)
    parent: Node | None = None
    kind: str = ""  # name / price / strike / marker / bare / filler for leaves

    def add(self, child: Node) -> Node:
        child.parent = self
        self.children.append(child)
        return child

    def chain(self) -> list[Node]:
        out, n = [], self
        while n is not None:
            out.append(n)
            n = n.parent
        return out[::-1]

    @property
    def depth(self) -> int:
        return len(self.chain())

    def path(self) -> NodePath:
        steps = []
        for n in self.chain():
            if n.parent is None:
                steps.append((n.tag, 1))
            else:
                same = [c for c in n.parent.children if c.tag == n.tag]
                steps.append((n.tag, next(i for i, c in enumerate(same, 1) if c is n)))
        return NodePath.parse(" -> ".join(f"{t}[{i}]" for t, i in steps))

    def iter(self):
        yield self
        for c in self.children:
            yield from c.iter()

    def html(self) -> str:
        return f"<{self.tag}>{self.text}{''.join(c.html() for c in self.children)}</{self.tag}>"


@dataclass
class Page:
    root: Node
    name: str

    @property
    def html(self) -> str:
        return "<!DOCTYPE html>" + self.root.html()

    def leaves(self) -> list[Node]:
        return [n for n in self.root.iter() if not n.children and n.text.strip()]

    def size(self) -> int:
        return sum(1 for _ in self.root.iter())


def random_page(rng: random.Random, max_nodes: int = 200, local_context: bool = False) -> Page:
    """Build a page of at most ``max_nodes`` elements.

    With ``local_context`` every planted text either ends in a number or holds
    no marker, so no leaf's verdict can depend on its neighbours.
    """
    while True:
        page = _build(rng, max_nodes, local_context)
        if page.size() <= max_nodes:
            return page


def _build(rng: random.Random, max_nodes: int, local_context: bool) -> Page:
    name = rng.choice(NAMES)
    root = Node("html")
    body = root.add(Node("body"))
    containers = [body]
    budget = rng.randrange(12, max_nodes - 2)
    count = 2

    def place(node: Node) -> None:
        rng.choice(containers).add(node)

    while count < budget - 2:
        roll = rng.random()
        if roll < 0.3:
            c = Node(rng.choice(CONTAINERS))
            place(c)
            containers.append(c)
            count += 1
            continue
        kind = rng.choices(["price", "strike", "marker", "bare", "filler"], [2, 1, 1, 2, 4])[0]
        count += _plant(rng, kind, place, local_context)

    # the name once (occasionally twice); sometimes absent
    if rng.random() < 0.95:
        for _ in range(2 if rng.random() < 0.1 else 1):
            text = rng.choice(["{}", "Điện thoại {}", "{} chính hãng"]).format(name)
            place(Node(rng.choice(LEAF_TAGS), text, kind="name"))
    # containers left empty would be childless non-text nodes; give them filler
    for c in containers:
        if not c.children:
            c.add(Node("span", rng.choice(FILLERS), kind="filler"))
    return Page(root, name)


def _plant(rng: random.Random, kind: str, place, local_context: bool) -> int:
    tag = rng.choice(LEAF_TAGS)
    if kind == "price":
        fmt = rng.choice(PREFIX_ONLY_FORMATS if local_context else PRICE_FORMATS)
        place(Node(tag, fmt.format(n=amount(rng)), kind="price"))
        return 1
    if kind == "strike":
        wrapper = Node(rng.choice(["strike", "s"]))
        text = f"VNĐ {amount(rng)}"
        if rng.random() < 0.5:
            wrapper.text, wrapper.kind = text, "strike"
            place(wrapper)
            return 1
        wrapper.add(Node("span", text, kind="strike"))
        place(wrapper)
        return 2
    if kind == "marker":
        fmt = rng.choice(LOCAL_MARKER_DECOYS if local_context else MARKER_DECOYS)
        place(Node(tag, fmt.format(n=amount(rng)), kind="marker"))
        return 1
    if kind == "bare":
        fmt = "Mã {n}" if local_context else rng.choice(BARE)
        place(Node(tag, fmt.format(n=rng.randrange(1, 99999)), kind="bare"))
        return 1
    place(Node(tag, rng.choice(FILLERS), kind="filler"))
    return 1


def brute_force_price(page: Page, tree, rules: RuleSet) -> tuple[Node | None, NodePath | None]:
    """Exhaustive reference: classify every number of every leaf, then take
    the argmax of (common-ancestor depth with the name leaf, leaf depth,
    earliest document position) over every maybe-actual leaf."""
    leaves = page.leaves()
    needle = normalize_name(page.name)
    name_leaf = next((n for n in leaves if needle in normalize_name(n.text)), None)
    if name_leaf is None:
        return None, None
    name_chain = name_leaf.chain()
    best = None
    for pos, leaf in enumerate(leaves):
        if leaf is name_leaf:
            continue
        text = normalize_space(leaf.text)
        path = leaf.path()
        maybe = False
        for m in NUMBER_RE.finditer(text):
            hit = NumberHit(path, m.group(), text, m.start())
            if classify(hit, tree, rules).verdict is Verdict.MAYBE_ACTUAL:
                maybe = True
                break
        if not maybe:
            continue
        chain = leaf.chain()
        shared = 0
        for a, b in zip(name_chain, chain):
            if a is not b:
                break
            shared += 1
        key = (shared, len(chain), -pos)
        if best is None or key > best[0]:
            best = (key, leaf)
    if best is None:
        return None, None
    return best[1], best[1].path()
