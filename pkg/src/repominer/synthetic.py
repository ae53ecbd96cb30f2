"""An in-memory stand-in for the GitHub REST API, used to author fixtures.

:class:`SyntheticGitHub` implements the transport protocol over a small
universe of repositories and users, with real pagination (``Link`` headers),
rate-limit headers, private repositories and scriptable failures. Recording
it through :class:`~repominer.replay.RecordingTransport` yields fixture sets
in exactly the format a live recording produces.
"""

from __future__ import annotations

import json
import random
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping
from urllib.parse import parse_qsl, urlencode, urlsplit

from .transport import Response

API_ROOT = "https://api.github.com"


@dataclass
class RepoData:
    raw: dict
    languages: dict = field(default_factory=dict)
    releases: list = field(default_factory=list)
    contributors: list = field(default_factory=list)
    pulls: list = field(default_factory=list)
    issues: list = field(default_factory=list)  # may include PR-marked records
    comments: dict = field(default_factory=dict)  # issue number -> list of raw comments
    subscribers: list = field(default_factory=list)
    commits: list = field(default_factory=list)
    private: bool = False

    @property
    def full_name(self) -> str:
        return self.raw["full_name"]


@dataclass
class UserData:
    raw: dict
    repos: list = field(default_factory=list)  # full names


class SyntheticGitHub:
    """Transport serving a fixed universe.

    ``script`` maps a request key (``GET /path?sorted-query``) to a list of
    responses handed out before the normal answer, which is how 5xx bursts and
    rate-limit rejections are staged. ``rate_limit``/``rate_reset`` feed the
    ``X-RateLimit-*`` headers; ``auth_status`` is the status for private
    repositories requested without a token.
    """

    def __init__(self, repos=(), users=(), search_total: dict | None = None, auth_status: int = 401,
                 rate_limit: int = 5000, rate_reset: int = 1_700_000_000):
        self.repos: dict[str, RepoData] = {r.full_name: r for r in repos}
        self.users: dict[str, UserData] = {u.raw["login"]: u for u in users}
        self.search_total = search_total or {}
        self.auth_status = auth_status
        self.rate_limit = rate_limit
        self.rate_reset = rate_reset
        self.script: dict[str, list[Response]] = defaultdict(list)
        self.log: list[str] = []
        self._lock = threading.Lock()

    # -- plumbing ----------------------------------------------------------

    def _headers(self, extra: Mapping[str, str] = ()) -> dict[str, str]:
        headers = {
            "Content-Type": "application/json; charset=utf-8",
            "X-RateLimit-Limit": str(self.rate_limit),
            "X-RateLimit-Remaining": str(self.rate_limit - 1),
            "X-RateLimit-Reset": str(self.rate_reset),
        }
        headers.update(extra)
        return headers

    def _json(self, status: int, payload, extra: Mapping[str, str] = ()) -> Response:
        body = json.dumps(payload, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
        return Response(status, self._headers(extra), body)

    def _error(self, status: int, message: str) -> Response:
        return self._json(status, {"message": message, "documentation_url": "https://docs.github.com/rest"})

    def _paged(self, path: str, params: dict, items: list, wrap=None) -> Response:
        page = int(params.get("page", 1))
        per_page = int(params.get("per_page", 30))
        start = (page - 1) * per_page
        chunk = items[start:start + per_page]
        last = max(1, -(-len(items) // per_page))
        links = []

        def url(p):
            q = dict(params, page=str(p), per_page=str(per_page))
            return f"{API_ROOT}{path}?{urlencode(sorted(q.items()))}"

        if page < last:
            links.append(f'<{url(page + 1)}>; rel="next"')
            links.append(f'<{url(last)}>; rel="last"')
        if page > 1:
            links.append(f'<{url(1)}>; rel="first"')
            links.append(f'<{url(page - 1)}>; rel="prev"')
        extra = {"Link": ", ".join(links)} if links else {}
        payload = wrap(chunk) if wrap else chunk
        return self._json(200, payload, extra)

    def send(self, method: str, url: str, headers: Mapping[str, str]) -> Response:
        parts = urlsplit(url)
        params = dict(parse_qsl(parts.query, keep_blank_values=True))
        key = f"{method} {parts.path}" + (f"?{urlencode(sorted(params.items()))}" if params else "")
        with self._lock:
            self.log.append(key)
            if self.script.get(key):
                return self.script[key].pop(0)
        authed = any(k.lower() == "authorization" for k in headers)
        return self.route(parts.path, params, authed)

    # -- routes ------------------------------------------------------------

    def route(self, path: str, params: dict, authed: bool) -> Response:
        segs = [s for s in path.split("/") if s]
        if segs == ["search", "repositories"]:
            return self._search(path, params)
        if len(segs) >= 3 and segs[0] == "repos":
            repo = self.repos.get(f"{segs[1]}/{segs[2]}")
            if repo is None:
                return self._error(404, "Not Found")
            if repo.private and not authed:
                return self._error(self.auth_status, "Requires authentication")
            return self._repo_route(repo, segs[3:], path, params)
        if len(segs) >= 2 and segs[0] == "users":
            user = self.users.get(segs[1])
            if user is None:
                return self._error(404, "Not Found")
            if len(segs) == 2:
                return self._json(200, user.raw)
            if segs[2:] == ["repos"]:
                repos = [self.repos[n].raw for n in user.repos if authed or not self.repos[n].private]
                return self._paged(path, params, repos)
        return self._error(404, "Not Found")

    def _search(self, path: str, params: dict) -> Response:
        topic = params.get("q", "")
        hits = [r.raw for r in self.repos.values() if r.raw.get("_topic") == topic and not r.private]
        hits.sort(key=lambda raw: -raw["stargazers_count"])
        total = self.search_total.get(topic, len(hits))
        clean = [{k: v for k, v in raw.items() if not k.startswith("_")} for raw in hits]
        return self._paged(
            path, params, clean, wrap=lambda chunk: {"total_count": total, "incomplete_results": False, "items": chunk}
        )

    def _repo_route(self, repo: RepoData, rest: list, path: str, params: dict) -> Response:
        clean = {k: v for k, v in repo.raw.items() if not k.startswith("_")}
        if not rest:
            return self._json(200, clean)
        name = rest[0]
        if name == "languages" and len(rest) == 1:
            return self._json(200, repo.languages)
        if name == "contributors" and len(rest) == 1:
            if not repo.contributors and not repo.commits:
                return Response(204, self._headers(), b"")
            return self._paged(path, params, repo.contributors)
        if name == "commits" and len(rest) == 1:
            if not repo.commits:
                return self._error(409, "Git Repository is empty.")
            return self._paged(path, params, repo.commits)
        lists = {"releases": repo.releases, "pulls": repo.pulls, "subscribers": repo.subscribers}
        if name in lists and len(rest) == 1:
            items = lists[name]
            if name == "pulls" and params.get("state", "open") != "all":
                items = [p for p in items if p["state"] == params.get("state", "open")]
            return self._paged(path, params, items)
        if name == "issues":
            if len(rest) == 1:
                items = repo.issues
                if params.get("state", "open") != "all":
                    items = [i for i in items if i["state"] == params.get("state", "open")]
                return self._paged(path, params, items)
            if len(rest) == 3 and rest[2] == "comments":
                return self._paged(path, params, repo.comments.get(int(rest[1]), []))
        return self._error(404, "Not Found")


# -- universe generation ------------------------------------------------------

LANGUAGES = ["C", "C++", "Go", "Haskell", "Java", "JavaScript", "OCaml", "Python", "Rust", "Shell", "TypeScript"]
LOGINS = ["ada", "bjarne", "dmr", "grace", "guido", "ken", "linus", "margaret", "niklaus", "rob", "yukihiro",
          "barbara", "edsger", "frances", "john", "alan", "donald", "leslie", "tony", "radia"]


def _ts(rng: random.Random, year_lo=2012, year_hi=2020) -> str:
    return (f"{rng.randint(year_lo, year_hi)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
            f"T{rng.randint(0, 23):02d}:{rng.randint(0, 59):02d}:{rng.randint(0, 59):02d}Z")


def _user(login: str) -> dict:
    uid = 1000 + LOGINS.index(login) if login in LOGINS else 9000 + sum(map(ord, login))
    return {"login": login, "id": uid, "type": "User", "site_admin": False}


def make_repo(rng: random.Random, repo_id: int, owner: str, name: str, topic: str, *, stars: int, forks: int,
              n_releases: int, n_contributors: int, n_pulls: int = 2, n_issues: int = 3,
              n_subscribers: int = 2, n_commits: int = 0, languages: dict | None = None,
              private: bool = False) -> RepoData:
    """One synthetic repository with realistic raw JSON for every detail route."""
    full = f"{owner}/{name}"
    created = _ts(rng, 2010, 2014)
    raw = {
        "id": repo_id,
        "node_id": f"R_{repo_id:08d}",
        "name": name,
        "full_name": full,
        "private": private,
        "owner": _user(owner),
        "html_url": f"https://github.com/{full}",
        "description": rng.choice(["", f"A {topic or 'small'} project", f'{name}: "fast", small, and correct',
                                   f"{topic or name}, tooling\nand experiments"]),
        "fork": False,
        "created_at": created,
        "updated_at": _ts(rng, 2019, 2020),
        "stargazers_count": stars,
        "watchers_count": stars,
        "forks_count": forks,
        "open_issues_count": n_issues,
        "default_branch": rng.choice(["master", "main"]),
        "_topic": topic,
    }
    if languages is None:
        picks = rng.sample(LANGUAGES, rng.randint(0, 4))
        languages = {lang: rng.randint(1, 200_000) for lang in picks}
    people = rng.sample(LOGINS, max(n_contributors, n_subscribers, 1))
    contributors = [dict(_user(p), contributions=rng.randint(1, 400)) for p in people[:n_contributors]]
    contributors.sort(key=lambda c: -c["contributions"])
    releases = [
        {"id": repo_id * 100 + i, "tag_name": f"v{i}.0.0", "name": rng.choice([f"Release {i}", ""]),
         "draft": False, "prerelease": rng.random() < 0.2, "created_at": _ts(rng, 2015, 2016),
         "published_at": _ts(rng, 2016, 2019)}
        for i in range(n_releases, 0, -1)
    ]
    pulls = []
    numbers = iter(range(1, 1000))
    for _ in range(n_pulls):
        created_pr = _ts(rng, 2016, 2017)
        state = rng.choice(["open", "closed"])
        merged = _ts(rng, 2018, 2019) if state == "closed" and rng.random() < 0.7 else None
        pulls.append({"number": next(numbers), "title": rng.choice(["Fix parser", "Add docs", "Speed up, a lot"]),
                      "state": state, "user": _user(rng.choice(LOGINS)), "created_at": created_pr,
                      "merged_at": merged})
    issues = []
    comments = {}
    for _ in range(n_issues):
        n = next(numbers)
        k = rng.randint(0, 2)
        issues.append({"number": n, "title": rng.choice(["Crash on empty input", "Docs typo", 'Error: "x"']),
                       "state": rng.choice(["open", "closed"]), "user": _user(rng.choice(LOGINS)),
                       "labels": [{"name": lab} for lab in rng.sample(["bug", "docs", "help wanted"], rng.randint(0, 2))],
                       "comments": k, "created_at": _ts(rng, 2016, 2018)})
        if k:
            comments[n] = [{"id": repo_id * 10_000 + n * 10 + j, "user": _user(rng.choice(LOGINS)),
                            "created_at": _ts(rng, 2018, 2019),
                            "body": rng.choice(["+1", "Confirmed.\nSee log, line 3", 'Works with "--fast"'])}
                           for j in range(k)]
    # the issues route mirrors every pull request, marked with a pull_request key
    for pr in pulls:
        issues.append({"number": pr["number"], "title": pr["title"], "state": pr["state"], "user": pr["user"],
                       "labels": [], "comments": 0, "created_at": pr["created_at"],
                       "pull_request": {"url": f"{API_ROOT}/repos/{full}/pulls/{pr['number']}"}})
    issues.sort(key=lambda i: -i["number"])
    subscribers = [_user(p) for p in people[:n_subscribers]]
    commits = []
    for i in range(n_commits):
        author = rng.choice(people)
        sha = "%040x" % rng.getrandbits(160)
        commits.append({"sha": sha, "author": _user(author) if rng.random() < 0.9 else None,
                        "commit": {"author": {"name": author, "date": _ts(rng, 2019, 2020)},
                                   "message": rng.choice(["Initial commit", "Fix build", "Refactor\n\nLong body"])}})
    return RepoData(raw, languages, releases, contributors, pulls, issues, comments, subscribers, commits, private)


def random_universe(seed: int, n_repos: int, topic: str) -> SyntheticGitHub:
    """Search universe of ``n_repos`` repositories with varied stars, forks, releases, contributors."""
    rng = random.Random(seed)
    repos = []
    for i in range(n_repos):
        owner = rng.choice(LOGINS)
        repos.append(make_repo(
            rng, 500_000 + i, owner, f"{topic}-{i:02d}", topic,
            stars=rng.choice([0, 3, 10, 10, 25, 50, 120, 400]),
            forks=rng.randint(0, 30),
            n_releases=rng.choice([0, 0, 1, 3, 5, 7]),
            n_contributors=rng.choice([1, 2, 4, 5, 9]),
            n_pulls=rng.randint(0, 2),
            n_issues=rng.randint(0, 2),
            n_subscribers=rng.randint(0, 3),
        ))
    return SyntheticGitHub(repos)
