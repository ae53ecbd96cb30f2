"""Record GitHub API traffic to fixture files and replay it offline.

A fixture set is a flat directory::

    index.json                      # {"entries": [{"request_key", "sequence_index", "file"}, ...]}
    <sha256(key)[:16]>-<seq>.json   # {request_key, sequence_index, status, headers, body_b64}

``request_key`` is ``METHOD /path?sorted-query`` (host-free), so fixtures
recorded against api.github.com replay under any base URL. Repeated
identical requests consume entries in sequence order; once a key's entries
are exhausted its last entry keeps being served.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import threading
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import FixtureCorrupt, IoError, UnmatchedRequest
from .transport import HttpTransport, Response, Transport, kept_headers, request_key

logger = logging.getLogger(__name__)

REDACTED = "[REDACTED]"


@dataclass(frozen=True)
class FixtureEntry:
    request_key: str
    sequence_index: int
    status: int
    headers: Mapping[str, str]
    body: bytes

    @property
    def filename(self) -> str:
        digest = hashlib.sha256(self.request_key.encode("utf-8")).hexdigest()[:16]
        return f"{digest}-{self.sequence_index:04d}.json"

    def to_json(self) -> dict:
        return {
            "request_key": self.request_key,
            "sequence_index": self.sequence_index,
            "status": self.status,
            "headers": dict(sorted(self.headers.items())),
            "body_b64": base64.b64encode(self.body).decode("ascii"),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FixtureEntry":
        try:
            return cls(
                request_key=data["request_key"],
                sequence_index=int(data["sequence_index"]),
                status=int(data["status"]),
                headers=dict(data.get("headers") or {}),
                body=base64.b64decode(data["body_b64"], validate=True),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureCorrupt(f"bad fixture entry: {exc}") from exc

    def response(self) -> Response:
        return Response(self.status, dict(self.headers), self.body)


def write_fixture_set(entries: Sequence[FixtureEntry], out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        index = []
        for entry in sorted(entries, key=lambda e: (e.request_key, e.sequence_index)):
            (out / entry.filename).write_text(
                json.dumps(entry.to_json(), indent=1, sort_keys=True) + "\n", encoding="utf-8"
            )
            index.append(
                {"request_key": entry.request_key, "sequence_index": entry.sequence_index, "file": entry.filename}
            )
        (out / "index.json").write_text(json.dumps({"entries": index}, indent=1) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(out, exc) from exc
    return out


def load_fixture_set(fixture_dir) -> list[FixtureEntry]:
    root = Path(fixture_dir)
    try:
        index = json.loads((root / "index.json").read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise FixtureCorrupt(f"{root} has no index.json") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise FixtureCorrupt(f"unreadable index in {root}: {exc}") from exc
    entries = []
    seen = set()
    for item in index.get("entries", []):
        path = root / item["file"]
        try:
            entry = FixtureEntry.from_json(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise FixtureCorrupt(f"unreadable fixture {path}: {exc}") from exc
        ident = (entry.request_key, entry.sequence_index)
        if ident in seen:
            raise FixtureCorrupt(f"duplicate fixture {ident}")
        seen.add(ident)
        entries.append(entry)
    return entries


class RecordingTransport:
    """Forward requests to ``inner`` and keep every exchange as a fixture entry.

    Entries are written when :meth:`save` is called (or the context exits).
    Any of ``secrets`` found in a stored header is replaced by ``[REDACTED]``;
    request headers are never stored at all.
    """

    def __init__(self, inner: Transport, out_dir, secrets: Sequence[str] = ()):
        self.inner = inner
        self.out_dir = Path(out_dir)
        self.secrets = [s for s in secrets if s]
        self.entries: list[FixtureEntry] = []
        self._counters: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()

    def _redact(self, value: str) -> str:
        for secret in self.secrets:
            value = value.replace(secret, REDACTED)
        return value

    def send(self, method: str, url: str, headers: Mapping[str, str]) -> Response:
        for value in headers.values():
            # a token picked up from the request must also be scrubbed from responses
            if value.startswith("token ") and value[6:] not in self.secrets:
                self.secrets.append(value[6:])
        resp = self.inner.send(method, url, headers)
        key = request_key(method, url)
        stored = {k: self._redact(v) for k, v in kept_headers(resp.headers).items()}
        with self._lock:
            seq = self._counters[key]
            self._counters[key] += 1
            self.entries.append(FixtureEntry(key, seq, resp.status, stored, resp.body))
        return resp

    def save(self) -> Path:
        with self._lock:
            return write_fixture_set(self.entries, self.out_dir)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.save()


def record(base_url: str, out_dir, token: str | None = None, inner: Transport | None = None):
    """A :class:`GitHubClient` whose traffic to ``base_url`` is recorded into ``out_dir``.

    Call ``client.transport.save()`` when done.
    """
    from .client import GitHubClient

    transport = RecordingTransport(inner or HttpTransport(), out_dir, secrets=[token] if token else [])
    return GitHubClient(base_url, transport=transport)


class ReplayTransport:
    """Serve recorded entries by request key and per-key sequence.

    In strict mode an unknown key raises :class:`UnmatchedRequest`; otherwise a
    synthetic 404 is served and the miss is logged and kept in ``misses``.
    """

    def __init__(self, fixture_dir, strict: bool = True):
        self.fixture_dir = Path(fixture_dir)
        self.strict = strict
        self._entries: dict[str, list[FixtureEntry]] = defaultdict(list)
        for entry in load_fixture_set(fixture_dir):
            self._entries[entry.request_key].append(entry)
        for seq in self._entries.values():
            seq.sort(key=lambda e: e.sequence_index)
        self._cursor: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()
        self.log: list[str] = []
        self.misses: list[str] = []

    def send(self, method: str, url: str, headers: Mapping[str, str]) -> Response:
        key = request_key(method, url)
        with self._lock:
            self.log.append(key)
            entries = self._entries.get(key)
            if not entries:
                self.misses.append(key)
                if self.strict:
                    raise UnmatchedRequest(key)
                logger.warning("replay miss: %s", key)
                return Response(404, {}, b'{"message":"Not Found"}')
            pos = self._cursor[key]
            self._cursor[key] = pos + 1
        return entries[min(pos, len(entries) - 1)].response()
