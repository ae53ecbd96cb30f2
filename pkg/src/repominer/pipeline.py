"""Dataset construction: search, release filter, detail extraction.

The three stages apply the user's thresholds in the order the data becomes
available, so no repository is ever fetched in more detail than needed to
reject it::

    search (stars, forks) -> languages + releases (min releases)
        -> contributors (min contributors) -> pulls, issues, comments, subscribers

Single-repository and single-user extraction live here too.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Sequence

from .client import ApiRequest, Credentials, GitHubClient
from .errors import ApiError, HttpError, SchemaError
from .model import (
    DEFAULT_PROMINENCE,
    CommitRecord,
    LanguageBreakdown,
    Release,
    RepositoryRecord,
    RepositorySummary,
    UserProfile,
    canonical_record,
    classify_languages,
    comment_from_raw,
    commit_from_raw,
    contributor_from_raw,
    is_pull_request,
    issue_from_raw,
    pull_from_raw,
    release_from_raw,
    subscriber_from_raw,
    summary_from_raw,
)

logger = logging.getLogger(__name__)

# The search API serves at most this many results per query.
SEARCH_LIMIT = 1000


@dataclass(frozen=True)
class FilterCriteria:
    topic: str
    min_stars: int = 0
    min_forks: int = 0
    min_releases: int = 0
    min_contributors: int = 0
    max_repos: int | None = None

    def __post_init__(self):
        if not self.topic or not self.topic.strip():
            raise ValueError("topic must be non-empty")
        for name in ("min_stars", "min_forks", "min_releases", "min_contributors"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.max_repos is not None and self.max_repos < 1:
            raise ValueError("max_repos must be a positive integer")

    def passes_basic(self, summary: RepositorySummary) -> bool:
        return summary.stars >= self.min_stars and summary.forks >= self.min_forks


@dataclass(frozen=True)
class DatasetManifest:
    topic: str
    criteria: FilterCriteria
    count_searched: int
    count_after_basic: int
    count_after_releases: int
    count_after_contributors: int
    started_at: str
    search_capped: bool = False
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        counts = self.counts()
        if not counts[0] >= counts[1] >= counts[2] >= counts[3]:
            raise ValueError(f"funnel counts must be non-increasing, got {counts}")

    def counts(self) -> tuple[int, int, int, int]:
        return (
            self.count_searched,
            self.count_after_basic,
            self.count_after_releases,
            self.count_after_contributors,
        )

    def funnel(self) -> list[tuple[str, int]]:
        labels = ("searched", "after stars/forks", "after releases", "after contributors")
        return list(zip(labels, self.counts()))


@dataclass(frozen=True)
class SearchResult:
    repos: list[RepositorySummary]
    count_searched: int
    search_capped: bool


@dataclass(frozen=True)
class Staged:
    """A repository that survived the release filter."""

    summary: RepositorySummary
    languages: LanguageBreakdown
    releases: tuple[Release, ...]


@dataclass
class StageOutput:
    items: list
    diagnostics: list[str] = field(default_factory=list)


def _utc_iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Extractor:
    """Runs extraction against one client; ``creds`` rides along on every call."""

    def __init__(
        self,
        client: GitHubClient,
        creds: Credentials = Credentials(),
        threshold=DEFAULT_PROMINENCE,
        concurrency: int | None = None,
    ):
        self.client = client
        self.creds = creds
        self.threshold = threshold
        self.concurrency = concurrency or client.concurrency

    # -- helpers ---------------------------------------------------------

    def _all(self, path: str, **params) -> list:
        return self.client.fetch_all(ApiRequest(path, params), self.creds)

    def _map(self, fn: Callable, items: Sequence) -> list:
        """Apply ``fn`` in bounded parallel; results keep input order.

        Each result is either ``fn``'s value or the exception it raised.
        """

        def guarded(item):
            try:
                return fn(item)
            except (ApiError, SchemaError) as exc:
                return exc

        if self.concurrency == 1 or len(items) < 2:
            return [guarded(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
            return list(pool.map(guarded, items))

    def languages(self, full_name: str) -> LanguageBreakdown:
        raw = self.client.get(f"/repos/{full_name}/languages", self.creds)
        return classify_languages(raw, self.threshold)

    def releases(self, full_name: str) -> list[Release]:
        return [release_from_raw(r) for r in self._all(f"/repos/{full_name}/releases")]

    def contributors(self, full_name: str):
        return [contributor_from_raw(r) for r in self._all(f"/repos/{full_name}/contributors")]

    def pulls(self, full_name: str):
        return [pull_from_raw(r) for r in self._all(f"/repos/{full_name}/pulls", state="all")]

    def issues(self, full_name: str):
        issues = []
        for raw in self._all(f"/repos/{full_name}/issues", state="all"):
            if is_pull_request(raw):
                continue
            comments = []
            if raw.get("comments"):
                comments = [
                    comment_from_raw(c)
                    for c in self._all(f"/repos/{full_name}/issues/{raw['number']}/comments")
                ]
            issues.append(issue_from_raw(raw, comments))
        return issues

    def subscribers(self, full_name: str):
        return [subscriber_from_raw(r) for r in self._all(f"/repos/{full_name}/subscribers")]

    def commits(self, full_name: str) -> list[CommitRecord]:
        try:
            raw = self._all(f"/repos/{full_name}/commits")
        except HttpError as exc:
            if exc.status == 409:  # empty repository
                return []
            raise
        return [commit_from_raw(r) for r in raw]

    # -- dataset stages --------------------------------------------------

    def stage1_search(self, criteria: FilterCriteria) -> SearchResult:
        cap = min(criteria.max_repos or SEARCH_LIMIT, SEARCH_LIMIT)
        req = ApiRequest("/search/repositories", {"q": criteria.topic, "sort": "stars", "order": "desc"})
        seen: set[int] = set()
        found: list[RepositorySummary] = []
        total = 0
        for page in self.client.iter_pages(req, self.creds):
            total = max(total, page.total_count or 0)
            for raw in page.items:
                summary = summary_from_raw(raw, criteria.topic)
                if summary.repo_id not in seen:
                    seen.add(summary.repo_id)
                    found.append(summary)
            if len(found) >= cap:
                found = found[:cap]
                break
        capped = cap == SEARCH_LIMIT and total > SEARCH_LIMIT
        if capped:
            logger.warning("search matched %d repositories; only %d are retrievable", total, SEARCH_LIMIT)
        found.sort(key=lambda s: (-s.stars, s.full_name))
        kept = [s for s in found if criteria.passes_basic(s)]
        return SearchResult(kept, len(found), capped)

    def stage2_languages(self, repos: Sequence[RepositorySummary], criteria: FilterCriteria) -> StageOutput:
        def fetch(summary: RepositorySummary):
            releases = self.releases(summary.full_name)
            languages = self.languages(summary.full_name)
            return Staged(summary, languages, tuple(releases))

        out = StageOutput([])
        for summary, result in zip(repos, self._map(fetch, repos)):
            if isinstance(result, Exception):
                out.diagnostics.append(f"{summary.full_name}: dropped at releases stage: {result}")
                logger.warning(out.diagnostics[-1])
            elif len(result.releases) >= criteria.min_releases:
                out.items.append(result)
        return out

    def _details(self, staged: Staged, min_contributors: int = 0) -> RepositoryRecord | None:
        name = staged.summary.full_name
        contributors = self.contributors(name)
        if len(contributors) < min_contributors:
            return None
        return canonical_record(
            staged.summary,
            staged.languages,
            contributors=contributors,
            releases=staged.releases,
            pulls=self.pulls(name),
            issues=self.issues(name),
            subscribers=self.subscribers(name),
        )

    def stage3_details(self, staged: Sequence[Staged], criteria: FilterCriteria) -> StageOutput:
        out = StageOutput([])
        results = self._map(lambda s: self._details(s, criteria.min_contributors), staged)
        for item, result in zip(staged, results):
            if isinstance(result, Exception):
                out.diagnostics.append(f"{item.summary.full_name}: dropped at details stage: {result}")
                logger.warning(out.diagnostics[-1])
            elif result is not None:
                out.items.append(result)
        return out

    def run_dataset(
        self, criteria: FilterCriteria, started_at: str | None = None
    ) -> tuple[list[RepositoryRecord], DatasetManifest]:
        started_at = started_at or _utc_iso(self.client.clock.now())
        found = self.stage1_search(criteria)
        staged = self.stage2_languages(found.repos, criteria)
        details = self.stage3_details(staged.items, criteria)
        manifest = DatasetManifest(
            topic=criteria.topic,
            criteria=criteria,
            count_searched=found.count_searched,
            count_after_basic=len(found.repos),
            count_after_releases=len(staged.items),
            count_after_contributors=len(details.items),
            started_at=started_at,
            search_capped=found.search_capped,
            diagnostics=tuple(staged.diagnostics + details.diagnostics),
        )
        return details.items, manifest

    # -- single repository / single user ---------------------------------

    def run_single_repo(self, owner: str, name: str) -> tuple[RepositoryRecord, list[CommitRecord]]:
        summary = summary_from_raw(self.client.get(f"/repos/{owner}/{name}", self.creds))
        full = summary.full_name
        staged = Staged(summary, self.languages(full), tuple(self.releases(full)))
        record = self._details(staged)
        return record, self.commits(full)

    def run_single_user(self, login: str) -> UserProfile:
        raw = self.client.get(f"/users/{login}", self.creds)
        if not raw.get("login"):
            raise SchemaError("login")
        repos = [summary_from_raw(r) for r in self._all(f"/users/{login}/repos")]
        results = self._map(lambda s: self.languages(s.full_name), repos)
        for result in results:
            if isinstance(result, Exception):
                raise result
        return UserProfile(
            login=raw["login"],
            user_id=int(raw.get("id") or 0),
            name=raw.get("name") or "",
            public_repo_count=int(raw.get("public_repos") or 0),
            followers=int(raw.get("followers") or 0),
            repos=tuple(repos),
            repo_languages={s.full_name: lang for s, lang in zip(repos, results)},
        )


def run_dataset(client: GitHubClient, criteria: FilterCriteria, creds: Credentials = Credentials()):
    return Extractor(client, creds).run_dataset(criteria)


def run_single_repo(client: GitHubClient, owner: str, name: str, creds: Credentials = Credentials()):
    return Extractor(client, creds).run_single_repo(owner, name)


def run_single_user(client: GitHubClient, login: str, creds: Credentials = Credentials()):
    return Extractor(client, creds).run_single_user(login)
