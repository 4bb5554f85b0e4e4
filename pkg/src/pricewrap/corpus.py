"""Synthetic fixture corpora: templated shop sites plus news/forum decoys.

Pages are written under ``root`` using :func:`pricewrap.urls.url_to_relpath`,
so a corpus can be served by :class:`pricewrap.crawler.CorpusTransport` or by
any HTTP server that routes on the Host header.  Each builder also writes the
search-provider fixture, the seed list and a gold file.
"""

from __future__ import annotations

import json
import random
import re
import unicodedata
from dataclasses import dataclass, field
from html import escape
from pathlib import Path

from .discovery import QueryTemplate, build_query
from .pricing import RuleSet
from .urls import url_to_relpath

NOKIA1200_PAGE = """<html><head><meta charset="utf-8"><title>Nokia 1200</title></head>
<body><table>
<tr><td>Nokia 1200</td><td>Điện thoại di động</td></tr>
<tr><td><strike>VNĐ 590.000</strike></td><td>VNĐ 540.000</td></tr>
<tr><td>Tiết kiệm:</td><td>VNĐ 100.000</td></tr>
</table></body></html>
"""

CATALOG = [
    "Nokia 1200", "Nokia 1202", "Nokia 6300 silver", "Nokia e71 white steel",
    "Nokia 1200 black", "Nokia 1200 white", "Nokia N70", "Nokia 5800 XpressMusic",
    "Nokia E63", "Nokia 2700 classic", "Samsung Galaxy S", "Samsung Corby S3650",
    "Samsung E1080", "Sony Ericsson W995", "Sony Ericsson K770i", "LG KP500 Cookie",
    "Motorola W220", "HTC Touch Diamond", "Lenovo Thinkpad t61", "Canon PowerShot G10",
    "iPhone 3GS 16GB", "BlackBerry Curve 8520", "Nokia X6", "Nokia C3",
]


def slugify(name: str) -> str:
    ascii_name = unicodedata.normalize("NFKD", name).encode("ascii", "ignore").decode()
    return re.sub(r"[^a-z0-9]+", "-", ascii_name.lower()).strip("-")


def vnd(amount: int) -> str:
    return f"{amount:,}".replace(",", ".")


@dataclass
class Product:
    name: str
    price: int | None  # None: "contact us" instead of a price
    old_price: int = 0
    pid: int = 0

    @property
    def save(self) -> int:
        return self.old_price - (self.price or 0)


@dataclass
class Site:
    host: str
    template: str
    scheme: str = "http"

    @property
    def root(self) -> str:
        return f"{self.scheme}://{self.host}/"

    def product_path(self, p: Product) -> str:
        if self.template == "div":
            return f"/product.php?id={p.pid}"
        if self.template == "grid":
            return f"/{p.pid}/{slugify(p.name)}.html"
        return f"/san-pham/{slugify(p.name)}.html"

    def product_url(self, p: Product) -> str:
        return f"{self.scheme}://{self.host}{self.product_path(p)}"

    def news_url(self, i: int) -> str:
        return f"{self.scheme}://{self.host}/tin-tuc/{i}.html"

    def forum_url(self, i: int) -> str:
        return f"{self.scheme}://{self.host}/dien-dan/{i}.html"


# --------------------------------------------------------------------------
# templates


def _page(title: str, body: str) -> str:
    return (f'<html><head><meta http-equiv="Content-Type" content="text/html; charset=utf-8">'
            f"<title>{escape(title)}</title></head>\n<body>\n{body}\n</body></html>\n")


def _header(site: Site) -> str:
    return (f'<div class="header"><a href="/">{escape(site.host)}</a> | '
            f'<a href="/tin-tuc/1.html">Tin tức</a> | <a href="/dien-dan/1.html">Diễn đàn</a></div>')


def _related(site: Site, related: list[Product]) -> str:
    items = []
    for r in related:
        price = f"Giá: {vnd(r.price)} VNĐ" if r.price else "Liên hệ"
        items.append(f'<li><a href="{site.product_path(r)}">{escape(r.name)}</a> '
                     f"<span>{price}</span></li>")
    return f'<div class="related"><h3>Sản phẩm khác</h3><ul>{"".join(items)}</ul></div>'


def price_display(site: Site, p: Product) -> str:
    """How the template prints the actual price (the gold price text)."""
    if p.price is None:
        return "Liên hệ"
    if site.template == "table":
        return f"VNĐ {vnd(p.price)}"
    if site.template == "div":
        return f"{vnd(p.price)} đ"
    if site.template == "grid":
        return f"{vnd(p.price)} VNĐ"
    return f"{p.price // 20000} USD"


def render_product(site: Site, p: Product, related: list[Product]) -> str:
    name = escape(p.name)
    shown = price_display(site, p)
    if site.template == "table":
        body = f"""{_header(site)}
<table class="product">
<tr><td>{name}</td><td>Bảo hành 12 tháng</td></tr>
<tr><td><strike>VNĐ {vnd(p.old_price)}</strike></td><td>{shown}</td></tr>
<tr><td>Tiết kiệm:</td><td>VNĐ {vnd(p.save)}</td></tr>
</table>
{_related(site, related)}
<div class="footer">Copyright 2011</div>"""
    elif site.template == "div":
        body = f"""<div id="top"><a href="/">{escape(site.host)}</a> <a href="/tin-tuc/1.html">Tin tức</a> <a href="/dien-dan/1.html">Diễn đàn</a></div>
<div id="main">
<div class="breadcrumb"><a href="/">Trang chủ</a> » <a href="/">Điện thoại</a></div>
<div class="detail">
<h1>{name}</h1>
<div class="prices">
<p>Giá thị trường: <s>{vnd(p.old_price)} đ</s></p>
<p><span>Giá:</span> <b>{shown}</b></p>
<p>Tiết kiệm: <i>{vnd(p.save)} đ</i></p>
</div>
<p class="note">Hàng chính hãng, bảo hành 12 tháng</p>
</div>
{_related(site, related)}
</div>"""
    elif site.template == "grid":
        body = f"""{_header(site)}
<div id="wrap">
<div id="left"><ul><li><a href="/">Điện thoại</a></li><li><a href="/">Máy ảnh</a></li></ul></div>
<div id="content">
<h2>{name}</h2>
<table class="gia">
<tr><td>Giá thị trường</td><td>{vnd(p.old_price)} VNĐ</td></tr>
<tr><td>Giá bán</td><td><font color="red">{shown}</font></td></tr>
<tr><td>Tiết kiệm</td><td>{vnd(p.save)} VNĐ</td></tr>
</table>
<div class="desc"><p>Pin 1200 mAh, bảo hành 12 tháng.</p></div>
{_related(site, related)}
</div>
</div>"""
    else:  # "dl"
        body = f"""{_header(site)}
<div class="box">
<dl>
<dt>Tên sản phẩm</dt><dd>{name}</dd>
<dt>Giá cũ</dt><dd><s>{p.old_price // 20000} USD</s></dd>
<dt>Giá</dt><dd>{shown}</dd>
</dl>
</div>
{_related(site, related)}"""
    return _page(p.name, body)


def render_news(site: Site, i: int, mention: str) -> str:
    body = f"""{_header(site)}
<div class="article">
<h1>Tin tức công nghệ số {i}</h1>
<p>Theo thống kê năm 2011, {escape(mention)} là một trong những mẫu điện thoại bán chạy nhất.</p>
<p>Có {1200 + i} người đã bình chọn cho sản phẩm này trong tuần qua.</p>
</div>"""
    if site.template == "div":
        body = f"""<div id="top"><a href="/">{escape(site.host)}</a></div>
<div id="main"><div class="breadcrumb"><a href="/">Trang chủ</a> » Tin tức</div>
<div class="article"><h2>Tin tức số {i}</h2><p>{escape(mention)} vừa có bản cập nhật mới với 12 tính năng.</p></div></div>"""
    return _page(f"Tin tức {i}", body)


def render_forum(site: Site, i: int, mention: str) -> str:
    body = f"""{_header(site)}
<div class="forum">
<div class="post"><div class="user">member{i}</div><div class="msg">Mình vừa mua {escape(mention)} được 3 tháng, dùng rất tốt.</div></div>
<div class="post"><div class="user">admin</div><div class="msg">Cảm ơn bạn đã chia sẻ, bạn mua giá 500.000 đ phải không?</div></div>
</div>"""
    return _page(f"Diễn đàn {i}", body)


def render_index(site: Site, products: list[Product], n_news: int, n_forum: int) -> str:
    items = "".join(f'<li><a href="{site.product_path(p)}">{escape(p.name)}</a></li>'
                    for p in products)
    news = "".join(f'<li><a href="/tin-tuc/{i}.html">Tin {i}</a></li>' for i in range(1, n_news + 1))
    forum = "".join(f'<li><a href="/dien-dan/{i}.html">Chủ đề {i}</a></li>'
                    for i in range(1, n_forum + 1))
    body = f"""{_header(site)}
<div class="home"><h3>Sản phẩm mới</h3><ul>{items}</ul><ul>{news}</ul><ul>{forum}</ul></div>"""
    return _page(site.host, body)


# --------------------------------------------------------------------------
# corpus assembly


@dataclass
class CorpusInfo:
    root: Path
    seeds: list[str]
    provider: dict[str, list[str]] = field(default_factory=dict)
    gold: list[dict] = field(default_factory=list)
    pages: dict[str, str] = field(default_factory=dict)
    commercial_urls: set[str] = field(default_factory=set)

    def write_page(self, url: str, html: str) -> None:
        path = self.root / "corpus" / url_to_relpath(url)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(html, encoding="utf-8")
        self.pages[url] = html

    @property
    def corpus_dir(self) -> Path:
        return self.root / "corpus"

    def finish(self) -> CorpusInfo:
        (self.root / "provider.json").write_text(
            json.dumps(self.provider, ensure_ascii=False, indent=1), encoding="utf-8")
        (self.root / "seeds.txt").write_text("\n".join(self.seeds) + "\n", encoding="utf-8")
        with open(self.root / "gold.jsonl", "w", encoding="utf-8") as fh:
            for g in self.gold:
                fh.write(json.dumps(g, ensure_ascii=False) + "\n")
        (self.root / "rules.json").write_text(
            json.dumps(RuleSet.default().to_dict(), ensure_ascii=False, indent=1),
            encoding="utf-8")
        return self


def _make_products(names: list[str], rng: random.Random, start_id: int = 100) -> list[Product]:
    out = []
    for i, name in enumerate(names):
        price = rng.randrange(40, 1500) * 10000
        old = price + rng.randrange(2, 30) * 10000
        out.append(Product(name, price, old, start_id + i))
    return out


def _write_site(info: CorpusInfo, site: Site, products: list[Product], rng: random.Random,
                n_news: int = 2, n_forum: int = 2) -> None:
    for p in products:
        others = [q for q in products if q is not p]
        related = rng.sample(others, k=min(len(others), rng.randrange(2, 5)))
        url = site.product_url(p)
        info.write_page(url, render_product(site, p, related))
        if p.price is not None:
            info.commercial_urls.add(url)
            info.gold.append({"url": url, "gold_name": p.name,
                              "gold_price_text": price_display(site, p)})
    mention = products[0].name
    for i in range(1, n_news + 1):
        info.write_page(site.news_url(i), render_news(site, i, mention))
    for i in range(1, n_forum + 1):
        info.write_page(site.forum_url(i), render_forum(site, i, mention))
    info.write_page(site.root, render_index(site, products, n_news, n_forum))


DEMO_SITES = [
    Site("www.dienthoaididong.com.vn", "table"),
    Site("www.trananh.vn", "div"),
    Site("www.vatgia.com", "grid"),
]
DEMO_SEEDS = ["Nokia 1200", "Nokia 1202", "Nokia 6300 silver", "Nokia e71 white steel",
              "Samsung Galaxy S"]


def build_demo_corpus(root: str | Path, seed: int = 2011,
                      products_per_site: int = 15) -> CorpusInfo:
    """Three shop sites, 20 pages each: index, products (one without a price), news, forum."""
    rng = random.Random(seed)
    info = CorpusInfo(Path(root), list(DEMO_SEEDS))
    site_products: dict[str, list[Product]] = {}
    for k, site in enumerate(DEMO_SITES):
        extra = [n for n in CATALOG if n not in DEMO_SEEDS and not n.startswith("Nokia 1200 ")]
        names = DEMO_SEEDS + rng.sample(extra, products_per_site - len(DEMO_SEEDS) - 1)
        products = _make_products(names, rng, 100 * (k + 1))
        products.append(Product("Nokia Lumia 800", None, 0, 100 * (k + 1) + 99))
        site_products[site.host] = products
        _write_site(info, site, products, rng)
    template = QueryTemplate()
    for seed_name in DEMO_SEEDS:
        urls = []
        for site in DEMO_SITES:
            p = next(q for q in site_products[site.host] if q.name == seed_name)
            urls.append(site.product_url(p))
        urls += [DEMO_SITES[0].news_url(1), DEMO_SITES[1].forum_url(1),
                 "http://www.tinhte.vn/threads/missing.html"]
        info.provider[build_query(seed_name, template)] = urls
    return info.finish()


NOKIA_SEEDS = ["Nokia 1200", "Nokia e71 white steel", "Nokia 1202", "Nokia 6300 silver"]
NOKIA_MAIN_SITES = [
    Site("www.123mua.com.vn", "table"),
    Site("www.vatgia.com", "grid"),
    Site("www.vinacms.vn", "div"),
    Site("www.chodientu.vn", "dl"),
]
NOKIA_MINOR_SITES = [
    Site("www.enbac.com", "div"),  # 3 supporting pages: exactly the threshold
    Site("www.aha.vn", "grid"),
    Site("www.quangcaosanpham.com", "table"),
    Site("www.dienthoaididong.com.vn", "dl"),
]
NOKIA_NONCOMMERCIAL = [Site("www.vnexpress.net", "table"), Site("www.tinhte.vn", "table")]


def build_nokia_corpus(root: str | Path, seed: int = 4) -> CorpusInfo:
    """Top-10 result lists for the four Nokia seeds.

    The four main shops carry every seed (support 4); www.enbac.com carries
    three of them (support 3); the other shops appear once; every list holds
    two news/forum pages without prices.  "Nokia 1200" therefore maps to 10
    URLs of which 8 are commercial.
    """
    rng = random.Random(seed)
    info = CorpusInfo(Path(root), list(NOKIA_SEEDS))
    carried = {s.host: list(NOKIA_SEEDS) for s in NOKIA_MAIN_SITES}
    carried["www.enbac.com"] = NOKIA_SEEDS[:3]
    for s in NOKIA_MINOR_SITES[1:]:
        carried[s.host] = NOKIA_SEEDS[:1]
    products_by_site: dict[str, list[Product]] = {}
    for k, site in enumerate(NOKIA_MAIN_SITES + NOKIA_MINOR_SITES):
        names = carried[site.host] + rng.sample(CATALOG[6:], 3)
        products = _make_products(names, rng, 100 * (k + 1))
        products_by_site[site.host] = products
        _write_site(info, site, products, rng, n_news=1, n_forum=1)
    for site in NOKIA_NONCOMMERCIAL:
        for i, name in enumerate(NOKIA_SEEDS, start=1):
            info.write_page(site.news_url(i), render_news(site, i, name))
    template = QueryTemplate()
    for seed_name in NOKIA_SEEDS:
        urls = []
        for site in NOKIA_MAIN_SITES + NOKIA_MINOR_SITES:
            if seed_name in carried[site.host]:
                p = next(q for q in products_by_site[site.host] if q.name == seed_name)
                urls.append(site.product_url(p))
        i = NOKIA_SEEDS.index(seed_name) + 1
        fillers = [s.news_url(j) for j in [i] + [j for j in range(1, 5) if j != i]
                   for s in NOKIA_NONCOMMERCIAL]
        for url in fillers:
            if len(urls) >= 10:
                break
            if url not in urls:
                urls.append(url)
        info.provider[build_query(seed_name, template)] = urls[:10]
    return info.finish()
