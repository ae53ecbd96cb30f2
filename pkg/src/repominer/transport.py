"""Wire-level plumbing: raw responses, request keys and the live HTTP transport."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Mapping, Protocol
from urllib.parse import parse_qsl, urlencode, urlsplit

import requests

#: Response headers worth keeping: pagination and rate-limit metadata.
KEPT_HEADERS = (
    "link",
    "retry-after",
    "x-ratelimit-limit",
    "x-ratelimit-remaining",
    "x-ratelimit-reset",
    "x-ratelimit-used",
)


@dataclass(frozen=True)
class Response:
    status: int
    headers: Mapping[str, str] = field(default_factory=dict)
    body: bytes = b""

    def header(self, name: str) -> str | None:
        name = name.lower()
        for key, value in self.headers.items():
            if key.lower() == name:
                return value
        return None


class Transport(Protocol):
    def send(self, method: str, url: str, headers: Mapping[str, str]) -> Response:
        """Perform one request. Network failures raise ``OSError`` (or a subclass)."""
        ...


def request_key(method: str, url: str) -> str:
    """Canonical ``METHOD /path?sorted=query`` string; host and scheme are dropped."""
    parts = urlsplit(url)
    query = sorted(parse_qsl(parts.query, keep_blank_values=True))
    key = f"{method.upper()} {parts.path or '/'}"
    if query:
        key += "?" + urlencode(query)
    return key


def kept_headers(headers: Mapping[str, str]) -> dict[str, str]:
    return {k.lower(): v for k, v in headers.items() if k.lower() in KEPT_HEADERS}


class HttpTransport:
    """Live transport backed by ``requests``; one session per thread."""

    def __init__(self, timeout: float = 30.0):
        self.timeout = timeout
        self._local = threading.local()

    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = self._local.session = requests.Session()
        return session

    def send(self, method: str, url: str, headers: Mapping[str, str]) -> Response:
        try:
            resp = self._session().request(method, url, headers=dict(headers), timeout=self.timeout)
        except requests.RequestException as exc:
            raise ConnectionError(str(exc)) from exc
        return Response(resp.status_code, dict(resp.headers), resp.content)
