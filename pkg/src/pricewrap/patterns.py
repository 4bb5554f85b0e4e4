"""XPath-style extraction patterns and the path-overlap similarity."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .dom import DomTree, NodePath, normalize_space, resolve


class Role(str, Enum):
    PRODUCT_NAME = "product_name"
    ACTUAL_PRODUCT_PRICE = "actual_product_price"


@dataclass(frozen=True)
class XpathPattern:
    steps: NodePath
    role: Role

    def __post_init__(self) -> None:
        if not len(self.steps):
            raise ValueError("pattern needs at least one step")
        object.__setattr__(self, "role", Role(self.role))

    def __str__(self) -> str:
        return f"{self.steps} -> {self.role.value}"

    @classmethod
    def parse(cls, text: str) -> XpathPattern:
        """Inverse of ``str()``: the last ``->`` segment names the role."""
        head, sep, role = text.rpartition("->")
        if not sep:
            raise ValueError(f"pattern text lacks a role suffix: {text!r}")
        return cls(NodePath.parse(head), Role(role.strip().lower()))


@dataclass(frozen=True)
class PatternPair:
    name_pattern: XpathPattern
    price_pattern: XpathPattern

    def __post_init__(self) -> None:
        if self.name_pattern.role is not Role.PRODUCT_NAME:
            raise ValueError("name_pattern must have role product_name")
        if self.price_pattern.role is not Role.ACTUAL_PRODUCT_PRICE:
            raise ValueError("price_pattern must have role actual_product_price")

    @classmethod
    def from_paths(cls, name_path: NodePath, price_path: NodePath) -> PatternPair:
        return cls(XpathPattern(name_path, Role.PRODUCT_NAME),
                   XpathPattern(price_path, Role.ACTUAL_PRODUCT_PRICE))

    @property
    def key(self) -> tuple[str, str]:
        """Canonical text form, used for hashing and support counting."""
        return str(self.name_pattern), str(self.price_pattern)

    def to_dict(self) -> dict[str, str]:
        return {"name_pattern": str(self.name_pattern),
                "price_pattern": str(self.price_pattern)}

    @classmethod
    def from_dict(cls, data: dict) -> PatternPair:
        return cls(XpathPattern.parse(data["name_pattern"]),
                   XpathPattern.parse(data["price_pattern"]))


def similarity(a: NodePath, b: NodePath, index_sensitive: bool = True) -> int:
    """Number of leading steps the two paths share.

    With ``index_sensitive=False`` only tags are compared.
    """
    count = 0
    for x, y in zip(a.steps, b.steps):
        if x.tag != y.tag or (index_sensitive and x.index != y.index):
            break
        count += 1
    return count


def apply_pattern(tree: DomTree, pattern: XpathPattern) -> tuple[NodePath, str] | None:
    node = resolve(tree, pattern.steps)
    if node is None:
        return None
    return pattern.steps, normalize_space(node.text)
