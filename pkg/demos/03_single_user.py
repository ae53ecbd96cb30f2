"""Summarise a user's language usage across all their repositories.

Bytes per language are summed over every repository before computing shares.

Run from the repository root:  python3 demos/03_single_user.py
"""

from pathlib import Path

from repominer import GitHubClient, run_single_user, user_language_report
from repominer.analytics import format_table

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

client = GitHubClient(base_url=f"replay:{FIXTURES / 'single_user'}")
profile = run_single_user(client, "margaret")

print(f"{profile.login}: {profile.public_repo_count} public repositories")
for full_name, breakdown in profile.repo_languages.items():
    print(f"  {full_name:<20} {dict(breakdown.entries)}")

rows = [[r.language, r.byte_count, r.percent] for r in user_language_report(profile)]
print(format_table(["language", "bytes", "percent"], rows))
