from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from repominer.client import GitHubClient, RetryPolicy
from repominer.replay import RecordingTransport, ReplayTransport
from repominer.synthetic import RepoData, SyntheticGitHub

FIXTURES = Path(__file__).parent / "fixtures"
DATASET_SETS = ["compilers", "parsers"]


class FakeClock:
    def __init__(self, t: float = 1_600_000_000.0):
        self.t = t
        self.sleeps: list[float] = []

    def now(self) -> float:
        return self.t

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        if seconds > 0:
            self.t += seconds


class ClockedTransport:
    """Wraps a transport and notes the clock reading at every send."""

    def __init__(self, inner, clock):
        self.inner = inner
        self.clock = clock
        self.sent_at: list[tuple[float, str]] = []

    def send(self, method, url, headers):
        self.sent_at.append((self.clock.now(), url))
        return self.inner.send(method, url, headers)


def make_client(transport, clock=None, **kw) -> GitHubClient:
    kw.setdefault("retry", RetryPolicy(3, 500, 8000))
    return GitHubClient("https://api.github.com", transport=transport, clock=clock or FakeClock(),
                        rng=random.Random(0), **kw)


def replay_client(name: str, clock=None, strict=True, **kw):
    transport = ReplayTransport(FIXTURES / name, strict=strict)
    return make_client(transport, clock, **kw), transport


def numbered_server(n: int) -> SyntheticGitHub:
    """One repository ``o/r`` whose releases route lists ids 1..n."""
    repo = RepoData(
        {"id": 1, "full_name": "o/r", "owner": {"login": "o"}, "stargazers_count": 0, "forks_count": 0},
        releases=[{"id": i} for i in range(1, n + 1)],
    )
    return SyntheticGitHub([repo])


def record_to(server, out_dir, action):
    transport = RecordingTransport(server, out_dir)
    action(make_client(transport))
    transport.save()
    return out_dir


def read_fixture_bodies(name: str) -> dict[str, list]:
    """request_key -> decoded JSON body of the first entry, read straight from disk."""
    import base64

    root = FIXTURES / name
    index = json.loads((root / "index.json").read_text())
    bodies = {}
    for item in index["entries"]:
        data = json.loads((root / item["file"]).read_text())
        raw = base64.b64decode(data["body_b64"])
        bodies[data["request_key"]] = json.loads(raw) if raw.strip() else []
    return bodies


@pytest.fixture
def clock():
    return FakeClock()


def oracle_universe(name: str) -> list[dict]:
    """Per-repository facts read straight from a recorded fixture set's bodies.

    Deliberately avoids the client, model and pipeline: pagination is followed
    by reading every recorded page of a route.
    """
    bodies = read_fixture_bodies(name)

    def pages(prefix):
        found = []
        for key, body in sorted(bodies.items()):
            path = key.split("?")[0]
            if path == f"GET {prefix}":
                page = int(dict(p.split("=") for p in key.split("?")[1].split("&"))["page"])
                found.append((page, body))
        return [item for _, body in sorted(found) for item in (body["items"] if isinstance(body, dict) else body)]

    repos = pages("/search/repositories")
    facts = []
    for raw in repos:
        full = raw["full_name"]
        facts.append({
            "full_name": full,
            "stars": raw["stargazers_count"],
            "forks": raw["forks_count"],
            "releases": len(pages(f"/repos/{full}/releases")),
            "contributors": len(pages(f"/repos/{full}/contributors")),
        })
    return facts


def brute_force_survivors(facts: list[dict], min_stars, min_forks, min_releases, min_contributors):
    survivors = []
    for repo in facts:
        if repo["stars"] >= min_stars and repo["forks"] >= min_forks:
            if repo["releases"] >= min_releases:
                if repo["contributors"] >= min_contributors:
                    survivors.append(repo["full_name"])
    return survivors
