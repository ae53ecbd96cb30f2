"""Paginated, rate-limit-aware GitHub REST v3 client.

The client never talks to the network directly; it drives a
:class:`~repominer.transport.Transport`, so the same code runs against
``api.github.com``, a recorded fixture directory or the in-memory
synthetic server used by the tests.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Iterator, Mapping
from urllib.parse import urlencode

from requests.utils import parse_header_links

from .errors import (
    ApiError,
    AuthError,
    DecodeError,
    HttpError,
    NotFound,
    PartialResult,
    RateLimitDeadlineExceeded,
    TransportError,
)
from .transport import HttpTransport, Response, Transport

logger = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://api.github.com"
ACCEPT = "application/vnd.github.v3+json"
MAX_PER_PAGE = 100
# GitHub's primary rate-limit window is one hour; default deadline is twice that.
DEFAULT_RATE_DEADLINE = 2 * 3600.0
MAX_RATE_REJECTIONS = 5


@dataclass(frozen=True)
class Credentials:
    username: str | None = None
    token: str | None = field(default=None, repr=False)

    @property
    def authenticated(self) -> bool:
        return bool(self.token)


@dataclass(frozen=True)
class ApiRequest:
    """One GET against an API route. ``query_params`` excludes ``page``/``per_page``."""

    path: str
    query_params: tuple[tuple[str, str], ...] = ()
    page: int = 1
    per_page: int = MAX_PER_PAGE

    def __post_init__(self):
        if isinstance(self.query_params, Mapping):
            object.__setattr__(self, "query_params", tuple(self.query_params.items()))
        params = tuple(sorted((str(k), str(v)) for k, v in self.query_params))
        object.__setattr__(self, "query_params", params)
        if not self.path.startswith("/"):
            raise ValueError(f"path must start with '/': {self.path!r}")
        if self.page < 1:
            raise ValueError(f"page must be >= 1, got {self.page}")
        if not 1 <= self.per_page <= MAX_PER_PAGE:
            raise ValueError(f"per_page must be in [1, {MAX_PER_PAGE}], got {self.per_page}")

    def params(self) -> list[tuple[str, str]]:
        merged = dict(self.query_params)
        merged["page"] = str(self.page)
        merged["per_page"] = str(self.per_page)
        return sorted(merged.items())

    def request_line(self) -> str:
        return f"GET {self.path}?{urlencode(self.params())}"

    def with_page(self, page: int) -> "ApiRequest":
        return ApiRequest(self.path, self.query_params, page, self.per_page)


@dataclass(frozen=True)
class Page:
    items: list
    has_next: bool
    rate_remaining: int | None
    rate_reset: int
    status: int
    # Set only for search routes, whose body wraps the items.
    total_count: int | None = None


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_delay: int = 500  # ms
    max_delay: int = 8000  # ms

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    def delay(self, attempt: int, rng: random.Random) -> float:
        """Full-jitter backoff in seconds before retry number ``attempt`` (1-based)."""
        ceiling = min(self.max_delay, self.base_delay * 2 ** (attempt - 1))
        return rng.uniform(0, ceiling) / 1000.0


class SystemClock:
    def now(self) -> float:
        return time.time()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class RateGate:
    """Shared send gate: holds every sender while the rate-limit budget is exhausted."""

    def __init__(self, clock, deadline: float = DEFAULT_RATE_DEADLINE):
        self.clock = clock
        self.deadline = deadline
        self.remaining: int | None = None
        self.reset: float = 0.0
        self._lock = threading.Lock()

    def update(self, resp: Response) -> None:
        remaining = resp.header("x-ratelimit-remaining")
        reset = resp.header("x-ratelimit-reset")
        retry_after = resp.header("retry-after")
        with self._lock:
            if remaining is not None:
                self.remaining = int(remaining)
            if reset is not None:
                self.reset = float(reset)
            if retry_after is not None and resp.status in (403, 429):
                self.remaining = 0
                self.reset = max(self.reset, self.clock.now() + float(retry_after))

    def exhaust(self) -> None:
        with self._lock:
            self.remaining = 0

    def wait(self) -> float:
        """Block until sending is allowed; returns seconds slept."""
        with self._lock:
            if self.remaining != 0:
                return 0.0
            pause = self.reset - self.clock.now()
            if pause > self.deadline:
                raise RateLimitDeadlineExceeded(
                    f"rate limit resets in {pause:.0f}s, beyond the {self.deadline:.0f}s deadline"
                )
            if pause > 0:
                logger.warning("rate limit exhausted, sleeping %.1fs until reset", pause)
                self.clock.sleep(pause)
            self.remaining = None
            return max(pause, 0.0)


def _is_rate_limited(resp: Response) -> bool:
    if resp.status == 429:
        return True
    return resp.status == 403 and (
        resp.header("x-ratelimit-remaining") == "0" or resp.header("retry-after") is not None
    )


def _has_next(resp: Response) -> bool:
    link = resp.header("link")
    if not link:
        return False
    return any(entry.get("rel") == "next" for entry in parse_header_links(link))


def _decode(resp: Response, path: str) -> tuple[list, int | None]:
    if not resp.body.strip():
        return [], None
    try:
        data = json.loads(resp.body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DecodeError(f"malformed JSON from {path}: {exc}", resp.status, path) from exc
    if isinstance(data, list):
        return data, None
    if isinstance(data, dict) and isinstance(data.get("items"), list) and "total_count" in data:
        return data["items"], int(data["total_count"])
    return [data], None


def make_transport(base_url: str) -> Transport:
    """Pick a transport for ``base_url``: ``replay:<dir>`` serves fixtures strictly."""
    if base_url.startswith("replay:"):
        from .replay import ReplayTransport

        return ReplayTransport(base_url[len("replay:"):], strict=True)
    return HttpTransport()


class GitHubClient:
    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        transport: Transport | None = None,
        retry: RetryPolicy | None = None,
        clock=None,
        rng: random.Random | None = None,
        rate_deadline: float = DEFAULT_RATE_DEADLINE,
        concurrency: int = 4,
    ):
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.transport = transport if transport is not None else make_transport(base_url)
        self.retry = retry or RetryPolicy()
        self.clock = clock or SystemClock()
        self.rng = rng or random.Random()
        self.concurrency = concurrency
        self.gate = RateGate(self.clock, rate_deadline)
        self.request_count = 0
        self._slots = threading.BoundedSemaphore(concurrency)
        self._count_lock = threading.Lock()

    def _url(self, req: ApiRequest) -> str:
        if self.base_url.startswith("replay:"):
            return f"{req.path}?{urlencode(req.params())}"
        return f"{self.base_url}{req.path}?{urlencode(req.params())}"

    def _send(self, url: str, headers: dict[str, str]) -> Response:
        self.gate.wait()
        with self._slots:
            with self._count_lock:
                self.request_count += 1
            logger.debug("GET %s", url)
            return self.transport.send("GET", url, headers)

    def execute(self, req: ApiRequest, creds: Credentials = Credentials()) -> Page:
        url = self._url(req)
        headers = {"Accept": ACCEPT, "User-Agent": "repominer"}
        if creds.token:
            headers["Authorization"] = f"token {creds.token}"

        failures = 0
        rejections = 0
        while True:
            try:
                resp = self._send(url, headers)
            except OSError as exc:
                failures += 1
                if failures >= self.retry.max_attempts:
                    raise TransportError(f"GET {req.path} failed: {exc}", None, req.path) from exc
                self.clock.sleep(self.retry.delay(failures, self.rng))
                continue

            self.gate.update(resp)
            if _is_rate_limited(resp):
                rejections += 1
                if rejections > MAX_RATE_REJECTIONS:
                    raise RateLimitDeadlineExceeded(
                        f"still rate limited after {MAX_RATE_REJECTIONS} waits", resp.status, req.path
                    )
                self.gate.exhaust()
                continue
            if resp.status >= 500:
                failures += 1
                if failures >= self.retry.max_attempts:
                    raise TransportError(
                        f"GET {req.path} returned {resp.status} after {failures} attempts",
                        resp.status,
                        req.path,
                    )
                self.clock.sleep(self.retry.delay(failures, self.rng))
                continue
            break

        if resp.status == 401:
            raise AuthError(f"authentication required for {req.path}", 401, req.path)
        if resp.status == 404:
            raise NotFound(f"not found: {req.path}", 404, req.path)
        if resp.status >= 400:
            raise HttpError(f"GET {req.path} returned {resp.status}", resp.status, req.path)

        items, total = _decode(resp, req.path)
        remaining = resp.header("x-ratelimit-remaining")
        return Page(
            items=items,
            has_next=_has_next(resp),
            rate_remaining=int(remaining) if remaining is not None else None,
            rate_reset=int(resp.header("x-ratelimit-reset") or 0),
            status=resp.status,
            total_count=total,
        )

    def iter_pages(self, req: ApiRequest, creds: Credentials = Credentials()) -> Iterator[Page]:
        if req.page != 1:
            raise ValueError("pagination must start at page 1")
        page_no = 1
        while True:
            page = self.execute(req.with_page(page_no), creds)
            yield page
            if not page.has_next:
                return
            page_no += 1

    def fetch_all(
        self, req: ApiRequest, creds: Credentials = Credentials(), cap: int | None = None
    ) -> list:
        """Every item of a paginated route, in server order, stopping at ``cap`` items."""
        if cap is not None and cap < 1:
            raise ValueError("cap must be a positive integer")
        items: list = []
        pages = self.iter_pages(req, creds)
        while True:
            try:
                page = next(pages)
            except StopIteration:
                return items
            except ApiError as exc:
                if items:
                    raise PartialResult(items, exc) from exc
                raise
            items.extend(page.items)
            if cap is not None and len(items) >= cap:
                return items[:cap]

    def get(self, path: str, creds: Credentials = Credentials(), **params) -> dict:
        """Single non-paginated object route such as ``/repos/{o}/{r}``."""
        page = self.execute(ApiRequest(path, params), creds)
        if not page.items:
            return {}
        return page.items[0]
