"""URL normalization and the URL <-> corpus file mapping."""

from __future__ import annotations

from urllib.parse import quote, unquote, urljoin, urlsplit, urlunsplit

_DEFAULT_PORTS = {"http": 80, "https": 443}
_PATH_SAFE = "/%:@!$&'()*+,;=~-._"


def _remove_dot_segments(path: str) -> str:
    out: list[str] = []
    segments = path.split("/")
    for i, seg in enumerate(segments):
        last = i == len(segments) - 1
        if seg == ".":
            if last:
                out.append("")
            continue
        if seg == "..":
            if len(out) > 1:
                out.pop()
            if last:
                out.append("")
            continue
        out.append(seg)
    result = "/".join(out)
    return result if result.startswith("/") else "/" + result


def normalize_url(url: str, base: str | None = None) -> str:
    """Absolute URL with lowercased scheme and host, no fragment, no default port,
    dot segments resolved and unsafe path characters percent-encoded; the query
    string is kept verbatim."""
    if base is not None:
        url = urljoin(base, url.strip())
    parts = urlsplit(url.strip())
    scheme = parts.scheme.lower()
    host = (parts.hostname or "").lower()
    try:
        port = parts.port
    except ValueError:
        port = None
    netloc = host
    if parts.username:
        userinfo = parts.username + (f":{parts.password}" if parts.password else "")
        netloc = f"{userinfo}@{netloc}"
    if port is not None and _DEFAULT_PORTS.get(scheme) != port:
        netloc = f"{netloc}:{port}"
    path = quote(_remove_dot_segments(parts.path or "/"), safe=_PATH_SAFE)
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def site_of(url: str) -> str:
    return (urlsplit(url).hostname or "").lower()


def url_to_relpath(url: str) -> str:
    """File path (relative to a corpus root) that stores ``url``: ``host/path[?query]``.

    Directory-style paths map to ``index.html`` inside them.
    """
    parts = urlsplit(normalize_url(url))
    path = unquote(parts.path)
    if path.endswith("/"):
        path += "index.html"
    rel = path.lstrip("/")
    if parts.query:
        rel += "?" + parts.query
    return f"{parts.hostname}/" + quote(rel, safe="/=&.-_?")
