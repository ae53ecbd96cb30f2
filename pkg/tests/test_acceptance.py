"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import filecmp
import io
import math
import random
import sqlite3
import time
from contextlib import redirect_stdout
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pytest

from repominer.analytics import contribution_report, user_language_report
from repominer.cli import run
from repominer.client import ApiRequest
from repominer.export import TABLES, export_csv, export_db, read_csv_records, read_csv_rows, read_db_rows
from repominer.model import Contributor, UserProfile, classify_languages
from repominer.pipeline import Extractor, FilterCriteria
from repominer.replay import ReplayTransport
from repominer.transport import Response

from conftest import (
    DATASET_SETS,
    FIXTURES,
    ClockedTransport,
    FakeClock,
    brute_force_survivors,
    make_client,
    numbered_server,
    oracle_universe,
    read_fixture_bodies,
    record_to,
    replay_client,
)

GOLDEN = Path(__file__).parent / "golden" / "compilers"
STARTED = "2020-01-01T00:00:00Z"
ENV = {"SOURCE_DATE_EPOCH": "1577836800"}
TABLE_NAMES = [t.name for t in TABLES]


def check(number, title, bound, fn):
    start = time.perf_counter()
    try:
        fn()
        error = None
    except AssertionError as exc:
        error = exc
    elapsed = time.perf_counter() - start
    ok = error is None and elapsed < bound
    status = "PASS" if ok else "FAIL"
    reason = "" if error is None else f" ({error})"
    print(f"\ncriterion {number} {status}: {title} [{elapsed:.2f}s, bound {bound:g}s]{reason}")
    if error is not None:
        raise error
    assert elapsed < bound, f"took {elapsed:.2f}s, bound {bound}s"


# 1 -----------------------------------------------------------------------

CRITERIA_GRID = [(0, 0, 0, 0), (10, 0, 0, 0), (0, 5, 1, 0), (50, 10, 2, 3), (200, 0, 0, 8), (0, 0, 5, 5)]


def funnel_oracle():
    for name in DATASET_SETS:
        facts = oracle_universe(name)
        assert len(facts) <= 50, f"{name} has {len(facts)} repos"
        for stars, forks, releases, contributors in CRITERIA_GRID:
            client, _ = replay_client(name)
            crit = FilterCriteria(name, stars, forks, releases, contributors)
            records, manifest = Extractor(client).run_dataset(crit, started_at=STARTED)
            expected = brute_force_survivors(facts, stars, forks, releases, contributors)
            got = [r.summary.full_name for r in records]
            assert sorted(got) == sorted(expected), f"{name} {crit}"
            c = manifest.counts()
            assert all(a >= b for a, b in zip(c, c[1:])), f"non-monotone {c}"
            assert c[-1] == len(records)


def test_criterion_1_funnel_oracle():
    check(1, "funnel survivors equal brute-force scan", 5, funnel_oracle)


# 2 -----------------------------------------------------------------------

def pagination(tmp_path):
    for n in (0, 1, 99, 100, 101, 250):
        out = tmp_path / str(n)
        record_to(numbered_server(n), out, lambda c: c.fetch_all(ApiRequest("/repos/o/r/releases")))
        transport = ReplayTransport(out)
        items = make_client(transport).fetch_all(ApiRequest("/repos/o/r/releases", per_page=100))
        assert [i["id"] for i in items] == list(range(1, n + 1)), f"n={n}"
        want = max(1, math.ceil(n / 100))
        assert len(transport.log) == want, f"n={n}: {len(transport.log)} requests, want {want}"


def test_criterion_2_pagination(tmp_path):
    check(2, "fetch_all returns n items in ceil(n/100) requests", 1, lambda: pagination(tmp_path))


# 3 -----------------------------------------------------------------------

def rate_limit(tmp_path):
    reset = 1_600_000_600
    server = numbered_server(3)
    key = "GET /repos/o/r/releases?page=1&per_page=100"
    exhausted = {"X-RateLimit-Remaining": "0", "X-RateLimit-Reset": str(reset)}
    # First answer succeeds but reports an empty budget, the second is a rejection.
    server.script[key] = [
        Response(200, {**exhausted, "Link": ""}, b'[{"id": 1}, {"id": 2}, {"id": 3}]'),
        Response(403, exhausted, b'{"message": "API rate limit exceeded"}'),
    ]
    record_to(server, tmp_path, lambda c: (c.execute(ApiRequest("/repos/o/r/releases")),
                                           _swallow(c, ApiRequest("/repos/o/r/releases"))))

    # Budget reported as zero: the next request must wait for the reset.
    clock = FakeClock(reset - 120)
    wire = ClockedTransport(ReplayTransport(tmp_path), clock)
    client = make_client(wire, clock)
    first = client.execute(ApiRequest("/repos/o/r/releases"))
    assert len(first.items) == 3 and first.rate_remaining == 0
    second = client.execute(ApiRequest("/repos/o/r/releases"))
    sends = [t for t, _ in wire.sent_at]
    assert sends[0] < reset
    assert all(t >= reset for t in sends[1:]), f"early send at {sends}"
    assert second.items, "run did not succeed after the reset"

    # A 403 with an exhausted budget is retried only after the reset.
    clock = FakeClock(reset - 30)
    wire = ClockedTransport(ReplayTransport(tmp_path), clock)
    client = make_client(wire, clock)
    wire.inner.send("GET", "/repos/o/r/releases?page=1&per_page=100", {})  # move past the first entry
    page = client.execute(ApiRequest("/repos/o/r/releases"))
    sends = [t for t, _ in wire.sent_at]
    assert len(sends) == 2 and sends[0] < reset <= sends[1], f"sends at {sends}"
    assert page.status == 200 and len(page.items) == 3


def _swallow(client, req):
    try:
        client.execute(req)
    except Exception:
        pass


def test_criterion_3_rate_limit(tmp_path):
    check(3, "no request before rate reset, success afterwards", 1, lambda: rate_limit(tmp_path))


# 4 -----------------------------------------------------------------------

def hundredths_half_even(n, total):
    q, r = divmod(10000 * n, total)
    if 2 * r > total or (2 * r == total and q % 2 == 1):
        q += 1
    return q


def assert_matches_oracle(report, counts, name_of):
    total = sum(counts.values())
    assert {name_of(r): r.exact for r in report} == {k: Fraction(100 * v, total) for k, v in counts.items()}
    for r in report:
        assert r.percent == Decimal(hundredths_half_even(counts[name_of(r)], total)).scaleb(-2)
    k = len(report)
    assert abs(sum(r.percent for r in report) - 100) <= Decimal("0.01") * (k - 1)
    shares = [r.exact for r in report]
    assert shares == sorted(shares, reverse=True)


def analytics():
    rng = random.Random(4)
    for trial in range(100):
        if trial % 2 == 0:
            counts = {f"user{i}": rng.randint(1, 10**4) for i in range(rng.randint(1, 20))}
            people = [Contributor(login, i + 1, n) for i, (login, n) in enumerate(counts.items())]
            report = contribution_report(people)
            assert_matches_oracle(report, counts, lambda r: r.login)
            scale = rng.randint(2, 1000)
            scaled = contribution_report([Contributor(p.login, p.contributor_id, p.commit_count * scale) for p in people])
            rng.shuffle(people)
            shuffled = contribution_report(people)
            assert [(r.login, r.percent) for r in scaled] == [(r.login, r.percent) for r in report]
            assert [(r.login, r.percent) for r in shuffled] == [(r.login, r.percent) for r in report]
        else:
            maps = [{lang: rng.randint(1, 10**7) for lang in rng.sample("ABCDEFGH", rng.randint(1, 5))}
                    for _ in range(rng.randint(1, 6))]
            counts = {}
            for m in maps:
                for lang, n in m.items():
                    counts[lang] = counts.get(lang, 0) + n
            report = user_language_report(_profile(maps))
            assert_matches_oracle(report, counts, lambda r: r.language)
            scale = rng.randint(2, 1000)
            scaled = user_language_report(_profile([{k: v * scale for k, v in m.items()} for m in maps]))
            shuffled = user_language_report(_profile(list(reversed(maps))))
            assert [(r.language, r.percent) for r in scaled] == [(r.language, r.percent) for r in report]
            assert [(r.language, r.percent) for r in shuffled] == [(r.language, r.percent) for r in report]


def _profile(maps):
    langs = {f"me/r{i}": classify_languages(m) for i, m in enumerate(maps)}
    return UserProfile("me", 1, "", len(maps), 0, (), langs)


def test_criterion_4_analytics():
    check(4, "percent reports match exact oracle, sum bound, invariances", 2, analytics)


# 5 -----------------------------------------------------------------------

def export_fidelity(tmp_path):
    client, _ = replay_client("compilers")
    records, manifest = Extractor(client).run_dataset(FilterCriteria("compilers"), started_at=STARTED)
    assert len(records) == 3
    export_csv(records, manifest, tmp_path)
    for name in TABLE_NAMES:
        assert (tmp_path / f"{name}.csv").read_bytes() == (GOLDEN / f"{name}.csv").read_bytes(), name
    db = tmp_path / "dataset.db"
    export_db(records, manifest, db)
    for name in TABLE_NAMES:
        assert len(read_db_rows(db, name)) == len(read_csv_rows(tmp_path, name)), name
    back = sorted(read_csv_records(tmp_path), key=lambda r: r.summary.repo_id)
    assert back == sorted(records, key=lambda r: r.summary.repo_id)
    ids = {row[0] for row in read_csv_rows(tmp_path, "repositories")}
    for name in TABLE_NAMES[1:]:
        assert {row[0] for row in read_csv_rows(tmp_path, name)} <= ids, name
    with sqlite3.connect(db) as conn:
        assert conn.execute("PRAGMA foreign_key_check").fetchall() == []


def test_criterion_5_export(tmp_path):
    check(5, "golden CSVs, CSV/DB parity, round trip, integrity", 5, lambda: export_fidelity(tmp_path))


# 6 -----------------------------------------------------------------------

def disjointness():
    bodies = read_fixture_bodies("single_repo")
    issues_route = bodies["GET /repos/octocat/Hello-World/issues?page=1&per_page=100&state=all"]
    marked = {i["number"] for i in issues_route if "pull_request" in i}
    assert marked, "fixture has no PR-marked records in the issues route"
    client, _ = replay_client("single_repo")
    record, _ = Extractor(client).run_single_repo("octocat", "Hello-World")
    issue_numbers = {i.issue_number for i in record.issues}
    pr_numbers = {p.pr_number for p in record.pulls}
    assert issue_numbers and pr_numbers
    assert issue_numbers.isdisjoint(pr_numbers)
    assert issue_numbers.isdisjoint(marked)


def test_criterion_6_disjoint():
    check(6, "issue and pull request numbers are disjoint", 1, disjointness)


# 7 -----------------------------------------------------------------------

def cli_run(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run(argv, ENV)
    return code, buf.getvalue()


def determinism(tmp_path):
    outputs = []
    for run_name in ("a", "b"):
        out = tmp_path / run_name
        code, stdout = cli_run(["dataset", "--topic", "parsers", "--min-stars", "10", "--min-releases", "1",
                                "--min-contributors", "2", "--base-url", f"replay:{FIXTURES / 'parsers'}",
                                "--out", str(out)])
        assert code == 0
        outputs.append((out, stdout))
    (a, out_a), (b, out_b) = outputs
    assert out_a == out_b
    assert sum(line.startswith(("searched", "after")) for line in out_a.splitlines()) == 4
    cmp = filecmp.dircmp(a, b)
    assert sorted(p.name for p in a.iterdir()) == sorted(p.name for p in b.iterdir())
    assert not cmp.left_only and not cmp.right_only
    for path in a.iterdir():
        assert path.read_bytes() == (b / path.name).read_bytes(), path.name


def test_criterion_7_determinism(tmp_path):
    check(7, "two CLI runs give byte-identical exports and stdout", 10, lambda: determinism(tmp_path))


# 8 -----------------------------------------------------------------------

def modes(tmp_path):
    bodies = read_fixture_bodies("single_repo")
    commits = bodies["GET /repos/octocat/Hello-World/commits?page=1&per_page=100"]
    code, stdout = cli_run(["repo", "--owner", "octocat", "--name", "Hello-World",
                            "--base-url", f"replay:{FIXTURES / 'single_repo'}", "--out", str(tmp_path / "repo")])
    assert code == 0
    rows = read_csv_rows(tmp_path / "repo", "commits")
    assert [r[2] for r in rows] == [c["sha"] for c in commits]
    lines = stdout.splitlines()
    table = lines[next(i for i, line in enumerate(lines) if line.startswith("---")) + 1:]
    percents = [Decimal(line.split()[-1]) for line in table]
    assert len(percents) == 3 and percents == sorted(percents, reverse=True)

    code, _ = cli_run(["user", "--login", "margaret", "--base-url", f"replay:{FIXTURES / 'single_user'}",
                       "--out", str(tmp_path / "user")])
    assert code == 0
    counts = {name: len(read_csv_rows(tmp_path / "user", name)) for name in ("user", "user_repos", "user_languages")}
    assert counts == {"user": 1, "user_repos": 3, "user_languages": 2}


def test_criterion_8_modes(tmp_path):
    check(8, "repo and user modes emit expected files and tables", 5, lambda: modes(tmp_path))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
