"""Typed records for the dataset schema and their mapping from raw API JSON.

Every record is a frozen dataclass. Child collections are tuples kept in
natural-key order (see :func:`canonical_record`) so that a record written to
the export tables and read back compares equal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Mapping

from .errors import SchemaError

DEFAULT_PROMINENCE = Fraction(1, 10)

_SHA = re.compile(r"^[0-9a-f]{40}$")


def parse_timestamp(value: str) -> datetime:
    """Parse GitHub's ISO-8601 form (``2011-01-26T19:01:12Z``)."""
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def iso_utc(value: str | None) -> str | None:
    """Normalise a timestamp to ``YYYY-MM-DDTHH:MM:SSZ``; ``None`` passes through."""
    if value is None or value == "":
        return None
    try:
        parsed = parse_timestamp(value)
    except ValueError as exc:
        raise SchemaError("timestamp", f"unparseable {value!r}") from exc
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _require(raw: Mapping[str, Any], *path: str) -> Any:
    node: Any = raw
    for key in path:
        if not isinstance(node, Mapping) or node.get(key) is None:
            raise SchemaError(".".join(path))
        node = node[key]
    return node


def _login(user: Any) -> str:
    if isinstance(user, Mapping):
        return user.get("login") or ""
    return ""


@dataclass(frozen=True)
class RepositorySummary:
    repo_id: int
    full_name: str
    owner_login: str
    stars: int
    forks: int
    watchers: int = 0
    topic: str = ""
    default_branch: str = ""
    created_at: str = ""
    description: str = ""

    def __post_init__(self):
        if self.full_name.count("/") != 1:
            raise SchemaError("full_name", f"expected owner/name, got {self.full_name!r}")
        for name in ("stars", "forks", "watchers"):
            if getattr(self, name) < 0:
                raise SchemaError(name, "must be non-negative")

    @property
    def owner(self) -> str:
        return self.full_name.split("/")[0]

    @property
    def name(self) -> str:
        return self.full_name.split("/")[1]


@dataclass(frozen=True)
class Contributor:
    login: str
    contributor_id: int
    commit_count: int

    def __post_init__(self):
        if self.commit_count < 1:
            raise SchemaError("commit_count", "contributors have at least one contribution")


@dataclass(frozen=True)
class Release:
    release_id: int
    tag: str
    name: str
    published_at: str
    is_prerelease: bool = False

    def __post_init__(self):
        try:
            parse_timestamp(self.published_at)
        except ValueError as exc:
            raise SchemaError("published_at", f"unparseable {self.published_at!r}") from exc


@dataclass(frozen=True)
class PullRequest:
    pr_number: int
    title: str
    state: str
    author_login: str
    created_at: str
    merged_at: str | None = None

    def __post_init__(self):
        if self.pr_number < 1:
            raise SchemaError("pr_number", "must be positive")
        if self.state not in ("open", "closed"):
            raise SchemaError("state", f"unexpected {self.state!r}")
        if self.merged_at is not None and parse_timestamp(self.merged_at) < parse_timestamp(self.created_at):
            raise SchemaError("merged_at", "precedes created_at")


@dataclass(frozen=True)
class IssueComment:
    comment_id: int
    author_login: str
    created_at: str
    body: str


@dataclass(frozen=True)
class Issue:
    issue_number: int
    title: str
    state: str
    author_login: str
    created_at: str
    labels: tuple[str, ...] = ()
    comment_count: int = 0
    comments: tuple[IssueComment, ...] = ()

    def __post_init__(self):
        if self.issue_number < 1:
            raise SchemaError("issue_number", "must be positive")
        if self.state not in ("open", "closed"):
            raise SchemaError("state", f"unexpected {self.state!r}")
        if self.comment_count < 0:
            raise SchemaError("comment_count", "must be non-negative")


@dataclass(frozen=True)
class Subscriber:
    login: str
    user_id: int


@dataclass(frozen=True)
class LanguageBreakdown:
    entries: Mapping[str, int] = field(default_factory=dict)
    prominent: tuple[str, ...] = ()
    others: tuple[str, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, LanguageBreakdown):
            return NotImplemented
        return (
            dict(self.entries) == dict(other.entries)
            and self.prominent == other.prominent
            and self.others == other.others
        )

    def __hash__(self):
        return hash((tuple(sorted(self.entries.items())), self.prominent, self.others))


@dataclass(frozen=True)
class CommitRecord:
    sha: str
    author_login: str
    authored_at: str
    message: str

    def __post_init__(self):
        if not _SHA.match(self.sha):
            raise SchemaError("sha", f"not 40 hex characters: {self.sha!r}")


@dataclass(frozen=True)
class RepositoryRecord:
    summary: RepositorySummary
    languages: LanguageBreakdown = field(default_factory=LanguageBreakdown)
    contributors: tuple[Contributor, ...] = ()
    releases: tuple[Release, ...] = ()
    pulls: tuple[PullRequest, ...] = ()
    issues: tuple[Issue, ...] = ()
    subscribers: tuple[Subscriber, ...] = ()


@dataclass(frozen=True)
class UserProfile:
    login: str
    user_id: int
    name: str
    public_repo_count: int
    followers: int
    repos: tuple[RepositorySummary, ...] = ()
    repo_languages: Mapping[str, LanguageBreakdown] = field(default_factory=dict)


def classify_languages(entries: Mapping[str, int], threshold=DEFAULT_PROMINENCE) -> LanguageBreakdown:
    """Split languages into prominent (byte share >= threshold) and the rest.

    If no language reaches the threshold, the largest one (smallest name on
    ties) is prominent on its own. Both lists are ordered by bytes descending,
    then name.
    """
    # floats go through their decimal repr so 0.1 means exactly one tenth
    threshold = Fraction(repr(threshold)) if isinstance(threshold, float) else Fraction(threshold)
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    entries = {str(k): int(v) for k, v in entries.items()}
    if any(v < 0 for v in entries.values()):
        raise ValueError("byte counts must be non-negative")
    if not entries:
        return LanguageBreakdown({}, (), ())

    order = sorted(entries, key=lambda k: (-entries[k], k))
    total = sum(entries.values())
    if total:
        prominent = [k for k in order if Fraction(entries[k], total) >= threshold]
    else:
        prominent = []
    if not prominent:
        prominent = [order[0]]
    chosen = set(prominent)
    others = [k for k in order if k not in chosen]
    return LanguageBreakdown(entries, tuple(prominent), tuple(others))


def summary_from_raw(raw: Mapping[str, Any], topic: str = "") -> RepositorySummary:
    repo_id = _require(raw, "id")
    full_name = _require(raw, "full_name")
    owner = _require(raw, "owner", "login")
    stars = _require(raw, "stargazers_count")
    forks = _require(raw, "forks_count")
    return RepositorySummary(
        repo_id=int(repo_id),
        full_name=full_name,
        owner_login=owner,
        stars=int(stars),
        forks=int(forks),
        watchers=int(raw.get("watchers_count") or 0),
        topic=topic,
        default_branch=raw.get("default_branch") or "",
        created_at=iso_utc(raw.get("created_at")) or "",
        description=raw.get("description") or "",
    )


def contributor_from_raw(raw: Mapping[str, Any]) -> Contributor:
    return Contributor(
        login=_require(raw, "login"),
        contributor_id=int(_require(raw, "id")),
        commit_count=int(_require(raw, "contributions")),
    )


def release_from_raw(raw: Mapping[str, Any]) -> Release:
    published = raw.get("published_at") or _require(raw, "created_at")
    return Release(
        release_id=int(_require(raw, "id")),
        tag=raw.get("tag_name") or "",
        name=raw.get("name") or "",
        published_at=iso_utc(published),
        is_prerelease=bool(raw.get("prerelease", False)),
    )


def pull_from_raw(raw: Mapping[str, Any]) -> PullRequest:
    return PullRequest(
        pr_number=int(_require(raw, "number")),
        title=raw.get("title") or "",
        state=_require(raw, "state"),
        author_login=_login(raw.get("user")),
        created_at=iso_utc(_require(raw, "created_at")),
        merged_at=iso_utc(raw.get("merged_at")),
    )


def is_pull_request(raw: Mapping[str, Any]) -> bool:
    """The issues route also lists pull requests; they carry a ``pull_request`` key."""
    return "pull_request" in raw


def issue_from_raw(raw: Mapping[str, Any], comments=None) -> Issue:
    """Map one issue; pass ``comments`` once fetched so the count matches them."""
    if is_pull_request(raw):
        raise SchemaError("pull_request", "record is a pull request, not an issue")
    labels = tuple(
        (lab.get("name") or "") if isinstance(lab, Mapping) else str(lab) for lab in raw.get("labels") or ()
    )
    if comments is None:
        comments, count = (), int(raw.get("comments") or 0)
    else:
        comments = tuple(comments)
        count = len(comments)
    return Issue(
        issue_number=int(_require(raw, "number")),
        title=raw.get("title") or "",
        state=_require(raw, "state"),
        author_login=_login(raw.get("user")),
        created_at=iso_utc(_require(raw, "created_at")),
        labels=labels,
        comment_count=count,
        comments=tuple(sorted(comments, key=lambda c: c.comment_id)),
    )


def comment_from_raw(raw: Mapping[str, Any]) -> IssueComment:
    return IssueComment(
        comment_id=int(_require(raw, "id")),
        author_login=_login(raw.get("user")),
        created_at=iso_utc(_require(raw, "created_at")),
        body=raw.get("body") or "",
    )


def subscriber_from_raw(raw: Mapping[str, Any]) -> Subscriber:
    return Subscriber(login=_require(raw, "login"), user_id=int(_require(raw, "id")))


def commit_from_raw(raw: Mapping[str, Any]) -> CommitRecord:
    commit = _require(raw, "commit")
    author = commit.get("author") or {}
    return CommitRecord(
        sha=_require(raw, "sha"),
        author_login=_login(raw.get("author")),
        authored_at=iso_utc(author.get("date")) or "",
        message=commit.get("message") or "",
    )


def canonical_record(
    summary: RepositorySummary,
    languages: LanguageBreakdown,
    contributors=(),
    releases=(),
    pulls=(),
    issues=(),
    subscribers=(),
) -> RepositoryRecord:
    """Build a record with every child collection in natural-key order, deduplicated."""
    seen: set[tuple[str, int]] = set()
    unique_subs = []
    for sub in subscribers:
        if (sub.login, sub.user_id) not in seen:
            seen.add((sub.login, sub.user_id))
            unique_subs.append(sub)
    return RepositoryRecord(
        summary=summary,
        languages=languages,
        contributors=tuple(sorted(contributors, key=lambda c: (c.login, c.contributor_id))),
        releases=tuple(sorted(releases, key=lambda r: r.release_id)),
        pulls=tuple(sorted(pulls, key=lambda p: p.pr_number)),
        issues=tuple(sorted(issues, key=lambda i: i.issue_number)),
        subscribers=tuple(sorted(unique_subs, key=lambda s: (s.user_id, s.login))),
    )
