"""Command-line front end: ``repominer {dataset,repo,user} ...``.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Reports go to
stdout; logging and diagnostics go to stderr. The access token is only ever
read from the environment variable named by ``--token-env``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, TextIO

from .analytics import contribution_report, format_table, user_language_report
from .client import DEFAULT_BASE_URL, Credentials, GitHubClient
from .errors import RepominerError, UsageError
from .export import export_all, export_commits, export_user
from .pipeline import Extractor, FilterCriteria


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    criteria: FilterCriteria | None = None
    owner: str | None = None
    name: str | None = None
    login: str | None = None
    out_dir: Path = Path("out")
    format: str = "both"
    token_env: str = "GITHUB_TOKEN"
    base_url: str = DEFAULT_BASE_URL
    concurrency: int = 4
    verbose: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _positive(text: str) -> int:
    value = _count(text)
    if value == 0:
        raise argparse.ArgumentTypeError("expected a positive integer, got 0")
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--format", choices=("csv", "db", "both"), default="both")
    p.add_argument("--token-env", default="GITHUB_TOKEN", metavar="VAR",
                   help="environment variable holding the access token")
    p.add_argument("--base-url", default=DEFAULT_BASE_URL,
                   help="API root; 'replay:<dir>' serves recorded fixtures")
    p.add_argument("--concurrency", type=_positive, default=4)
    p.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="repominer", allow_abbrev=False, description="Extract structured data from GitHub repositories.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    ds = sub.add_parser("dataset", allow_abbrev=False, help="build a filtered dataset for a topic")
    ds.add_argument("--topic", required=True)
    ds.add_argument("--min-stars", type=_count, default=0)
    ds.add_argument("--min-forks", type=_count, default=0)
    ds.add_argument("--min-releases", type=_count, default=0)
    ds.add_argument("--min-contributors", type=_count, default=0)
    ds.add_argument("--max-repos", type=_positive, default=None)
    _add_common(ds)

    repo = sub.add_parser("repo", allow_abbrev=False, help="extract one repository with all its commits")
    repo.add_argument("--owner", required=True)
    repo.add_argument("--name", required=True)
    _add_common(repo)

    user = sub.add_parser("user", allow_abbrev=False, help="extract one user and all their repositories")
    user.add_argument("--login", required=True)
    _add_common(user)
    return parser


def parse_args(argv) -> CliConfig:
    ns = build_parser().parse_args(list(argv))
    criteria = None
    if ns.subcommand == "dataset":
        if not ns.topic.strip():
            raise UsageError("repominer dataset: --topic must be non-empty")
        criteria = FilterCriteria(
            topic=ns.topic,
            min_stars=ns.min_stars,
            min_forks=ns.min_forks,
            min_releases=ns.min_releases,
            min_contributors=ns.min_contributors,
            max_repos=ns.max_repos,
        )
    return CliConfig(
        subcommand=ns.subcommand,
        criteria=criteria,
        owner=getattr(ns, "owner", None),
        name=getattr(ns, "name", None),
        login=getattr(ns, "login", None),
        out_dir=Path(ns.out),
        format=ns.format,
        token_env=ns.token_env,
        base_url=ns.base_url,
        concurrency=ns.concurrency,
        verbose=ns.verbose,
    )


def _started_at(env: Mapping[str, str]) -> str:
    # SOURCE_DATE_EPOCH pins the recorded start time for reproducible exports.
    epoch = env.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%SZ")


def main(config: CliConfig, env: Mapping[str, str] | None = None, stdout: TextIO | None = None,
         client: GitHubClient | None = None) -> int:
    env = os.environ if env is None else env
    out = stdout or sys.stdout
    token = env.get(config.token_env) or None
    creds = Credentials(username=config.owner or config.login, token=token)
    log = logging.getLogger("repominer")
    try:
        if client is None:
            client = GitHubClient(config.base_url, concurrency=config.concurrency)
        extractor = Extractor(client, creds, concurrency=config.concurrency)
        started_at = _started_at(env)

        if config.subcommand == "dataset":
            records, manifest = extractor.run_dataset(config.criteria, started_at=started_at)
            export_all(records, manifest, config.out_dir, config.format)
            print(f"topic: {manifest.topic}", file=out)
            print(format_table(["stage", "repositories"], [list(row) for row in manifest.funnel()]), file=out)
            for line in manifest.diagnostics:
                print(f"warning: {line}", file=sys.stderr)
            log.info("exported %d repositories to %s", len(records), config.out_dir)

        elif config.subcommand == "repo":
            record, commits = extractor.run_single_repo(config.owner, config.name)
            export_all([record], None, config.out_dir, config.format, mode="repo", started_at=started_at)
            export_commits(record.summary.repo_id, commits, config.out_dir)
            s = record.summary
            print(f"repository: {s.full_name}  stars: {s.stars}  forks: {s.forks}  commits: {len(commits)}",
                  file=out)
            rows = [[c.login, c.commit_count, f"{c.percent:.2f}"] for c in contribution_report(record.contributors)]
            print(format_table(["contributor", "commits", "percent"], rows), file=out)

        else:
            profile = extractor.run_single_user(config.login)
            export_user(profile, config.out_dir, started_at=started_at)
            print(f"user: {profile.login}  repositories: {len(profile.repos)}  followers: {profile.followers}",
                  file=out)
            rows = [[s.language, s.byte_count, f"{s.percent:.2f}"] for s in user_language_report(profile)]
            print(format_table(["language", "bytes", "percent"], rows), file=out)
    except RepominerError as exc:
        print(f"repominer: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def run(argv=None, env: Mapping[str, str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(str(exc), file=sys.stderr)
        return 2
    logging.basicConfig(
        level=logging.DEBUG if config.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return main(config, env)


if __name__ == "__main__":
    sys.exit(run())
