import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from repominer.client import ApiRequest
from repominer.errors import SchemaError
from repominer.model import (
    CommitRecord,
    Contributor,
    PullRequest,
    RepositorySummary,
    Release,
    classify_languages,
    issue_from_raw,
    iso_utc,
    summary_from_raw,
)

from conftest import replay_client

RAW = {
    "id": 1,
    "full_name": "a/b",
    "owner": {"login": "a"},
    "stargazers_count": 5,
    "forks_count": 2,
}


def brute_force_classify(entries, threshold):
    """Independent oracle: exact shares, then the fallback rule, no shared code."""
    total = sum(entries.values())
    prominent = set()
    for lang, n in entries.items():
        if total and Fraction(n, total) >= threshold:
            prominent.add(lang)
    if entries and not prominent:
        best = max(entries.values())
        prominent = {min(k for k, v in entries.items() if v == best)}
    return prominent, set(entries) - prominent


class TestSummaryFromRaw:
    def test_direct_copy(self):
        s = summary_from_raw(RAW)
        assert (s.repo_id, s.full_name, s.owner_login, s.stars, s.forks) == (1, "a/b", "a", 5, 2)
        assert (s.watchers, s.description, s.default_branch, s.created_at) == (0, "", "", "")

    @pytest.mark.parametrize("field", ["id", "full_name", "stargazers_count", "forks_count"])
    def test_missing_required_field(self, field):
        raw = {k: v for k, v in RAW.items() if k != field}
        with pytest.raises(SchemaError) as info:
            summary_from_raw(raw)
        assert info.value.field == field

    def test_missing_owner_login(self):
        with pytest.raises(SchemaError, match="owner.login"):
            summary_from_raw(dict(RAW, owner={}))

    def test_replayed_public_repository(self):
        # hand-transcribed fields of octocat/Hello-World
        client, _ = replay_client("octocat")
        raw = client.get("/repos/octocat/Hello-World")
        s = summary_from_raw(raw, topic="demo")
        assert s == RepositorySummary(
            repo_id=1296269,
            full_name="octocat/Hello-World",
            owner_login="octocat",
            stars=1721,
            forks=1648,
            watchers=1721,
            topic="demo",
            default_branch="master",
            created_at="2011-01-26T19:01:12Z",
            description="My first repository on GitHub!",
        )

    def test_full_name_needs_one_slash(self):
        with pytest.raises(SchemaError):
            summary_from_raw(dict(RAW, full_name="a/b/c"))

    def test_negative_counts_rejected(self):
        with pytest.raises(SchemaError):
            summary_from_raw(dict(RAW, stargazers_count=-1))


class TestInvariants:
    def test_contributor_needs_a_contribution(self):
        with pytest.raises(SchemaError):
            Contributor("x", 1, 0)

    def test_sha_shape(self):
        CommitRecord("a" * 40, "", "2020-01-01T00:00:00Z", "")
        with pytest.raises(SchemaError):
            CommitRecord("A" * 40, "", "", "")
        with pytest.raises(SchemaError):
            CommitRecord("abc", "", "", "")

    def test_merge_after_creation(self):
        with pytest.raises(SchemaError):
            PullRequest(1, "t", "closed", "x", "2020-01-02T00:00:00Z", "2020-01-01T00:00:00Z")

    def test_release_timestamp_parses(self):
        with pytest.raises(SchemaError):
            Release(1, "v1", "", "yesterday")

    def test_pull_request_marker_is_not_an_issue(self):
        raw = {"number": 1, "state": "open", "created_at": "2020-01-01T00:00:00Z", "pull_request": {}}
        with pytest.raises(SchemaError):
            issue_from_raw(raw)

    def test_comment_count_matches_fetched_comments(self):
        raw = {"number": 1, "state": "open", "created_at": "2020-01-01T00:00:00Z", "comments": 5}
        assert issue_from_raw(raw).comment_count == 5
        assert issue_from_raw(raw, []).comment_count == 0

    def test_iso_utc_normalises_offsets(self):
        assert iso_utc("2020-01-01T02:00:00+02:00") == "2020-01-01T00:00:00Z"
        assert iso_utc(None) is None


class TestClassifyLanguages:
    def test_both_prominent(self):
        b = classify_languages({"A": 750, "B": 250}, Fraction(1, 10))
        assert b.prominent == ("A", "B") and b.others == ()

    def test_small_share_is_other(self):
        b = classify_languages({"A": 990, "B": 10}, Fraction(1, 10))
        assert b.prominent == ("A",) and b.others == ("B",)

    def test_empty(self):
        b = classify_languages({})
        assert b.entries == {} and b.prominent == () and b.others == ()

    def test_fallback_to_largest_with_name_tiebreak(self):
        b = classify_languages({"Z": 5, "Y": 5, "X": 4}, Fraction(1, 2))
        assert b.prominent == ("Y",)
        assert b.others == ("Z", "X")

    def test_threshold_boundary_is_inclusive(self):
        assert classify_languages({"A": 9, "B": 1}, 0.1).prominent == ("A", "B")

    @pytest.mark.parametrize("threshold", [0, 1.5])
    def test_threshold_range(self, threshold):
        with pytest.raises(ValueError):
            classify_languages({"A": 1}, threshold)

    def test_random_maps_match_oracle(self):
        rng = random.Random(2024)
        names = ["C", "Go", "Java", "Lua", "Perl", "Rust", "Zig"]
        for _ in range(5):
            entries = {lang: rng.randint(0, 5000) for lang in rng.sample(names, rng.randint(1, 6))}
            threshold = Fraction(rng.randint(1, 40), 100)
            b = classify_languages(entries, threshold)
            assert (set(b.prominent), set(b.others)) == brute_force_classify(entries, threshold)

    @given(
        entries=st.dictionaries(st.sampled_from(list("ABCDEFGH")), st.integers(0, 10**6), max_size=6),
        threshold=st.fractions(min_value=Fraction(1, 1000), max_value=1),
        k=st.integers(1, 1000),
    )
    def test_partition_oracle_and_scale_invariance(self, entries, threshold, k):
        b = classify_languages(entries, threshold)
        assert set(b.prominent) | set(b.others) == set(entries)
        assert not set(b.prominent) & set(b.others)
        assert (set(b.prominent), set(b.others)) == brute_force_classify(entries, threshold)
        if entries:
            assert b.prominent
        scaled = classify_languages({lang: n * k for lang, n in entries.items()}, threshold)
        if sum(entries.values()):
            assert (scaled.prominent, scaled.others) == (b.prominent, b.others)


def test_request_for_languages_route():
    # languages come back as an object, which the client wraps as a single item
    assert ApiRequest("/repos/a/b/languages").request_line().startswith("GET /repos/a/b/languages?")
