"""Percentage reports: contributor shares of a repository, language shares of a user.

Shares are exact fractions; the rendered percent is rounded half-to-even to
two decimals with no largest-remainder fix-up, so a report of k rows can sum
to 100 +/- 0.01 * (k - 1).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping

from .model import Contributor, UserProfile


def render_percent(share: Fraction) -> Decimal:
    """``share`` in [0, 1] as a percent with two decimals, half-even."""
    # round() on a Fraction is exact and rounds half to even.
    hundredths = round(share * 10000)
    return Decimal(hundredths).scaleb(-2)


@dataclass(frozen=True)
class ContributionShare:
    login: str
    commit_count: int
    percent: Decimal
    exact: Fraction


@dataclass(frozen=True)
class LanguageShare:
    language: str
    byte_count: int
    percent: Decimal
    exact: Fraction


def _shares(counts: Mapping[str, int]) -> list[tuple[str, int, Fraction]]:
    total = sum(counts.values())
    rows = [(key, n, Fraction(n, total) if total else Fraction(0)) for key, n in counts.items()]
    rows.sort(key=lambda r: (-r[2], r[0]))
    return rows


def contribution_report(contributors: Iterable[Contributor]) -> list[ContributionShare]:
    counts = Counter()
    for c in contributors:
        counts[c.login] += c.commit_count
    return [
        ContributionShare(login, n, render_percent(share), share * 100)
        for login, n, share in _shares(counts)
    ]


def language_totals(profile: UserProfile) -> Counter:
    totals: Counter = Counter()
    for breakdown in profile.repo_languages.values():
        for lang, n in breakdown.entries.items():
            totals[lang] += n
    return totals


def user_language_report(profile: UserProfile) -> list[LanguageShare]:
    totals = {k: v for k, v in language_totals(profile).items()}
    return [
        LanguageShare(lang, n, render_percent(share), share * 100)
        for lang, n, share in _shares(totals)
    ]


def format_table(headers: list[str], rows: list[list]) -> str:
    """Plain aligned text table; numeric-looking columns are right-aligned."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    numeric = [
        all(isinstance(row[i], (int, float, Decimal)) for row in rows) and bool(rows)
        for i in range(len(headers))
    ]
    lines = []
    for n, row in enumerate(cells):
        parts = [
            cell.rjust(widths[i]) if numeric[i] else cell.ljust(widths[i]) for i, cell in enumerate(row)
        ]
        lines.append("  ".join(parts).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
