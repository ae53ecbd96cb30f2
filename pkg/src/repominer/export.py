"""CSV and SQLite export of extracted records.

Dataset tables (column order is part of the file format)::

    repositories    repo_id, full_name, owner_login, stars, forks, watchers,
                    topic, default_branch, created_at, description
    languages       repo_id, language, bytes, prominent
    contributors    repo_id, login, contributor_id, commit_count
    releases        repo_id, release_id, tag, name, published_at, is_prerelease
    pull_requests   repo_id, pr_number, title, state, author_login, created_at, merged_at
    issues          repo_id, issue_number, title, state, author_login, created_at,
                    labels, comment_count
    issue_comments  repo_id, issue_number, comment_id, author_login, created_at, body
    subscribers     repo_id, login, user_id

Rows are sorted by ``(repo_id, natural key)``. Booleans are written as 0/1,
``labels`` as a compact JSON array, and a missing ``merged_at`` as an empty
field (NULL in the database). CSV files are UTF-8, LF-terminated, with
minimal RFC 4180 quoting.
"""

from __future__ import annotations

import csv
import io
import json
import sqlite3
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .analytics import user_language_report
from .errors import IoError, SchemaConflict
from .model import (
    CommitRecord,
    Contributor,
    Issue,
    IssueComment,
    LanguageBreakdown,
    PullRequest,
    Release,
    RepositoryRecord,
    RepositorySummary,
    Subscriber,
    UserProfile,
)
from .pipeline import DatasetManifest, FilterCriteria


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[tuple[str, str], ...]  # (column, sqlite type)
    key: tuple[str, ...]  # natural key, after repo_id
    rows: Callable[[RepositoryRecord], Iterable[tuple]]

    @property
    def header(self) -> list[str]:
        return [c for c, _ in self.columns]


def _repo_rows(r: RepositoryRecord):
    s = r.summary
    yield (s.repo_id, s.full_name, s.owner_login, s.stars, s.forks, s.watchers,
           s.topic, s.default_branch, s.created_at, s.description)


def _language_rows(r: RepositoryRecord):
    prominent = set(r.languages.prominent)
    for lang, n in r.languages.entries.items():
        yield (r.summary.repo_id, lang, n, int(lang in prominent))


def _issue_rows(r: RepositoryRecord):
    for i in r.issues:
        labels = json.dumps(list(i.labels), ensure_ascii=False, separators=(",", ":"))
        yield (r.summary.repo_id, i.issue_number, i.title, i.state, i.author_login,
               i.created_at, labels, i.comment_count)


def _comment_rows(r: RepositoryRecord):
    for i in r.issues:
        for c in i.comments:
            yield (r.summary.repo_id, i.issue_number, c.comment_id, c.author_login, c.created_at, c.body)


TABLES: tuple[Table, ...] = (
    Table(
        "repositories",
        (("repo_id", "INTEGER"), ("full_name", "TEXT"), ("owner_login", "TEXT"), ("stars", "INTEGER"),
         ("forks", "INTEGER"), ("watchers", "INTEGER"), ("topic", "TEXT"), ("default_branch", "TEXT"),
         ("created_at", "TEXT"), ("description", "TEXT")),
        (),
        _repo_rows,
    ),
    Table(
        "languages",
        (("repo_id", "INTEGER"), ("language", "TEXT"), ("bytes", "INTEGER"), ("prominent", "INTEGER")),
        ("language",),
        _language_rows,
    ),
    Table(
        "contributors",
        (("repo_id", "INTEGER"), ("login", "TEXT"), ("contributor_id", "INTEGER"), ("commit_count", "INTEGER")),
        ("login", "contributor_id"),
        lambda r: ((r.summary.repo_id, c.login, c.contributor_id, c.commit_count) for c in r.contributors),
    ),
    Table(
        "releases",
        (("repo_id", "INTEGER"), ("release_id", "INTEGER"), ("tag", "TEXT"), ("name", "TEXT"),
         ("published_at", "TEXT"), ("is_prerelease", "INTEGER")),
        ("release_id",),
        lambda r: ((r.summary.repo_id, x.release_id, x.tag, x.name, x.published_at, int(x.is_prerelease))
                   for x in r.releases),
    ),
    Table(
        "pull_requests",
        (("repo_id", "INTEGER"), ("pr_number", "INTEGER"), ("title", "TEXT"), ("state", "TEXT"),
         ("author_login", "TEXT"), ("created_at", "TEXT"), ("merged_at", "TEXT")),
        ("pr_number",),
        lambda r: ((r.summary.repo_id, p.pr_number, p.title, p.state, p.author_login, p.created_at, p.merged_at)
                   for p in r.pulls),
    ),
    Table(
        "issues",
        (("repo_id", "INTEGER"), ("issue_number", "INTEGER"), ("title", "TEXT"), ("state", "TEXT"),
         ("author_login", "TEXT"), ("created_at", "TEXT"), ("labels", "TEXT"), ("comment_count", "INTEGER")),
        ("issue_number",),
        _issue_rows,
    ),
    Table(
        "issue_comments",
        (("repo_id", "INTEGER"), ("issue_number", "INTEGER"), ("comment_id", "INTEGER"),
         ("author_login", "TEXT"), ("created_at", "TEXT"), ("body", "TEXT")),
        ("issue_number", "comment_id"),
        _comment_rows,
    ),
    Table(
        "subscribers",
        (("repo_id", "INTEGER"), ("login", "TEXT"), ("user_id", "INTEGER")),
        ("user_id", "login"),
        lambda r: ((r.summary.repo_id, s.login, s.user_id) for s in r.subscribers),
    ),
)

COMMIT_COLUMNS = ("repo_id", "position", "sha", "author_login", "authored_at", "message")
USER_COLUMNS = ("login", "user_id", "name", "public_repo_count", "followers")
USER_REPO_COLUMNS = TABLES[0].header
USER_LANGUAGE_COLUMNS = ("language", "byte_count", "percent")
USER_REPO_LANGUAGE_COLUMNS = ("full_name", "language", "bytes", "prominent")


@dataclass(frozen=True)
class ExportBundle:
    out_dir: Path
    csv_files: tuple[tuple[str, int], ...]
    db_file: Path | None
    manifest_file: Path | None

    def row_counts(self) -> dict[str, int]:
        return dict(self.csv_files)


def table_rows(table: Table, records: Sequence[RepositoryRecord]) -> list[tuple]:
    key_idx = [table.header.index(k) for k in ("repo_id",) + table.key]
    rows = [row for r in records for row in table.rows(r)]
    return sorted(rows, key=lambda row: tuple(row[i] for i in key_idx))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(path, exc) from exc


def _prepare_dir(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(out, exc) from exc
    return out


def manifest_dict(manifest: DatasetManifest | None, records: Sequence[RepositoryRecord] = (),
                  mode: str = "dataset", started_at: str = "") -> dict:
    if manifest is None:
        return {
            "mode": mode,
            "topic": None,
            "criteria": None,
            "counts": {"repositories": len(records)},
            "started_at": started_at,
            "search_capped": False,
            "diagnostics": [],
        }
    return {
        "mode": mode,
        "topic": manifest.topic,
        "criteria": asdict(manifest.criteria),
        "counts": {
            "searched": manifest.count_searched,
            "after_basic": manifest.count_after_basic,
            "after_releases": manifest.count_after_releases,
            "after_contributors": manifest.count_after_contributors,
        },
        "started_at": manifest.started_at,
        "search_capped": manifest.search_capped,
        "diagnostics": list(manifest.diagnostics),
    }


def read_manifest(path) -> DatasetManifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    counts = data["counts"]
    return DatasetManifest(
        topic=data["topic"],
        criteria=FilterCriteria(**data["criteria"]),
        count_searched=counts["searched"],
        count_after_basic=counts["after_basic"],
        count_after_releases=counts["after_releases"],
        count_after_contributors=counts["after_contributors"],
        started_at=data["started_at"],
        search_capped=data["search_capped"],
        diagnostics=tuple(data.get("diagnostics", ())),
    )


def _write_manifest(out: Path, data: dict) -> Path:
    path = out / "manifest.json"
    _write_text(path, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def export_csv(records: Sequence[RepositoryRecord], manifest: DatasetManifest | None, out_dir,
               mode: str = "dataset", started_at: str = "") -> ExportBundle:
    """Write the eight dataset tables plus ``manifest.json`` into ``out_dir``."""
    out = _prepare_dir(out_dir)
    counts = []
    for table in TABLES:
        rows = table_rows(table, records)
        _write_text(out / f"{table.name}.csv", _csv_text(table.header, rows))
        counts.append((table.name, len(rows)))
    manifest_file = _write_manifest(out, manifest_dict(manifest, records, mode, started_at))
    return ExportBundle(out, tuple(counts), None, manifest_file)


def export_commits(repo_id: int, commits: Sequence[CommitRecord], out_dir) -> Path:
    """``commits.csv`` for single-repository mode; rows keep server order."""
    out = _prepare_dir(out_dir)
    rows = [(repo_id, i, c.sha, c.author_login, c.authored_at, c.message) for i, c in enumerate(commits)]
    path = out / "commits.csv"
    _write_text(path, _csv_text(COMMIT_COLUMNS, rows))
    return path


def _create_sql(table: Table) -> str:
    cols = [f"{name} {kind}" + (" NOT NULL" if name in ("repo_id",) + table.key else "")
            for name, kind in table.columns]
    if table.name == "repositories":
        cols[0] = "repo_id INTEGER PRIMARY KEY"
    else:
        cols.append(f"PRIMARY KEY ({', '.join(('repo_id',) + table.key)})")
        cols.append("FOREIGN KEY (repo_id) REFERENCES repositories(repo_id)")
    return f"CREATE TABLE {table.name} (\n  " + ",\n  ".join(cols) + "\n)"


def export_db(records: Sequence[RepositoryRecord], manifest: DatasetManifest | None, db_path,
              overwrite: bool = False, mode: str = "dataset", started_at: str = "") -> ExportBundle:
    """Write the eight tables (plus a one-row ``manifest`` table) to a SQLite file.

    An existing file is never touched unless ``overwrite`` is set. All inserts
    run in a single transaction.
    """
    path = Path(db_path)
    if path.exists():
        if not overwrite:
            raise SchemaConflict(f"{path} already exists; pass overwrite=True to replace it")
        try:
            path.unlink()
        except OSError as exc:
            raise IoError(path, exc) from exc
    if not path.parent.is_dir():
        raise IoError(path, FileNotFoundError(f"missing directory {path.parent}"))

    try:
        conn = sqlite3.connect(path, isolation_level=None)
    except sqlite3.Error as exc:
        raise IoError(path, exc) from exc
    counts = []
    try:
        conn.execute("PRAGMA foreign_keys = ON")
        conn.execute("BEGIN")
        for table in TABLES:
            conn.execute(_create_sql(table))
            rows = table_rows(table, records)
            marks = ", ".join("?" * len(table.columns))
            conn.executemany(f"INSERT INTO {table.name} VALUES ({marks})", rows)
            counts.append((table.name, len(rows)))
        conn.execute("CREATE TABLE manifest (json TEXT NOT NULL)")
        data = manifest_dict(manifest, records, mode, started_at)
        conn.execute("INSERT INTO manifest VALUES (?)", (json.dumps(data, sort_keys=True),))
        conn.execute("COMMIT")
    except sqlite3.Error as exc:
        conn.execute("ROLLBACK")
        conn.close()
        path.unlink(missing_ok=True)
        raise IoError(path, exc) from exc
    conn.close()
    return ExportBundle(path.parent, tuple(counts), path, None)


def export_user(profile: UserProfile, out_dir, started_at: str = "") -> ExportBundle:
    """Write ``user.csv``, ``user_repos.csv``, ``user_languages.csv`` and
    ``user_repo_languages.csv`` plus ``manifest.json``."""
    out = _prepare_dir(out_dir)
    user_rows = [(profile.login, profile.user_id, profile.name, profile.public_repo_count, profile.followers)]
    repo_rows = sorted(
        (next(iter(_repo_rows(RepositoryRecord(s)))) for s in profile.repos), key=lambda r: (r[0], r[1])
    )
    report = user_language_report(profile)
    lang_rows = [(s.language, s.byte_count, f"{s.percent:.2f}") for s in report]
    per_repo = sorted(
        (full_name, lang, n, int(lang in b.prominent))
        for full_name, b in profile.repo_languages.items()
        for lang, n in b.entries.items()
    )
    files = (
        ("user", USER_COLUMNS, user_rows),
        ("user_repos", USER_REPO_COLUMNS, repo_rows),
        ("user_languages", USER_LANGUAGE_COLUMNS, lang_rows),
        ("user_repo_languages", USER_REPO_LANGUAGE_COLUMNS, per_repo),
    )
    counts = []
    for name, header, rows in files:
        _write_text(out / f"{name}.csv", _csv_text(header, rows))
        counts.append((name, len(rows)))
    data = manifest_dict(None, mode="user", started_at=started_at)
    data["counts"] = {"repositories": len(profile.repos)}
    manifest_file = _write_manifest(out, data)
    return ExportBundle(out, tuple(counts), None, manifest_file)


# -- reading back ------------------------------------------------------------


def _read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def read_csv_records(out_dir) -> list[RepositoryRecord]:
    """Rebuild records from an exported directory (inverse of :func:`export_csv`)."""
    out = Path(out_dir)
    tables = {t.name: _read_csv(out / f"{t.name}.csv") for t in TABLES}

    def by_repo(name):
        grouped: dict[int, list[dict]] = {}
        for row in tables[name]:
            grouped.setdefault(int(row["repo_id"]), []).append(row)
        return grouped

    langs, contribs, rels = by_repo("languages"), by_repo("contributors"), by_repo("releases")
    pulls, issues, comments, subs = (by_repo("pull_requests"), by_repo("issues"),
                                     by_repo("issue_comments"), by_repo("subscribers"))
    records = []
    for row in tables["repositories"]:
        rid = int(row["repo_id"])
        summary = RepositorySummary(
            repo_id=rid, full_name=row["full_name"], owner_login=row["owner_login"],
            stars=int(row["stars"]), forks=int(row["forks"]), watchers=int(row["watchers"]),
            topic=row["topic"], default_branch=row["default_branch"], created_at=row["created_at"],
            description=row["description"],
        )
        lang_rows = langs.get(rid, [])
        entries = {x["language"]: int(x["bytes"]) for x in lang_rows}
        order = sorted(entries, key=lambda k: (-entries[k], k))
        flagged = {x["language"] for x in lang_rows if x["prominent"] == "1"}
        breakdown = LanguageBreakdown(
            entries, tuple(k for k in order if k in flagged), tuple(k for k in order if k not in flagged)
        )
        issue_comments: dict[int, list[IssueComment]] = {}
        for c in comments.get(rid, []):
            issue_comments.setdefault(int(c["issue_number"]), []).append(
                IssueComment(int(c["comment_id"]), c["author_login"], c["created_at"], c["body"])
            )
        records.append(RepositoryRecord(
            summary=summary,
            languages=breakdown,
            contributors=tuple(Contributor(x["login"], int(x["contributor_id"]), int(x["commit_count"]))
                               for x in contribs.get(rid, [])),
            releases=tuple(Release(int(x["release_id"]), x["tag"], x["name"], x["published_at"],
                                   x["is_prerelease"] == "1") for x in rels.get(rid, [])),
            pulls=tuple(PullRequest(int(x["pr_number"]), x["title"], x["state"], x["author_login"],
                                    x["created_at"], x["merged_at"] or None) for x in pulls.get(rid, [])),
            issues=tuple(Issue(int(x["issue_number"]), x["title"], x["state"], x["author_login"],
                               x["created_at"], tuple(json.loads(x["labels"])), int(x["comment_count"]),
                               tuple(issue_comments.get(int(x["issue_number"]), ())))
                         for x in issues.get(rid, [])),
            subscribers=tuple(Subscriber(x["login"], int(x["user_id"])) for x in subs.get(rid, [])),
        ))
    return records


def read_db_rows(db_path, table: str) -> list[tuple]:
    """All rows of ``table`` in natural-key order, as stored."""
    schema = next(t for t in TABLES if t.name == table)
    order = ", ".join(("repo_id",) + schema.key)
    with sqlite3.connect(db_path) as conn:
        return list(conn.execute(f"SELECT * FROM {table} ORDER BY {order}"))


def read_csv_rows(out_dir, table: str) -> list[list[str]]:
    with open(Path(out_dir) / f"{table}.csv", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[1:]


def export_all(records, manifest, out_dir, fmt: str = "both", overwrite: bool = False,
               mode: str = "dataset", started_at: str = "") -> ExportBundle:
    """Emit CSV, DB or both. The manifest is always written."""
    if fmt not in ("csv", "db", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    out = _prepare_dir(out_dir)
    bundle = None
    if fmt in ("csv", "both"):
        bundle = export_csv(records, manifest, out, mode, started_at)
    if fmt in ("db", "both"):
        db = export_db(records, manifest, out / "dataset.db", overwrite, mode, started_at)
        if bundle is None:
            manifest_file = _write_manifest(out, manifest_dict(manifest, records, mode, started_at))
            return ExportBundle(out, db.csv_files, db.db_file, manifest_file)
        return ExportBundle(out, bundle.csv_files, db.db_file, bundle.manifest_file)
    return bundle
