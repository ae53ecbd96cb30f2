"""Pull everything about one repository, including its full commit history.

Contribution shares are computed from commit counts with exact fractions and
only rounded for display, so the table is stable across runs.

Run from the repository root:  python3 demos/02_single_repository.py
"""

from pathlib import Path

from repominer import GitHubClient, contribution_report, run_single_repo
from repominer.analytics import format_table

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

client = GitHubClient(base_url=f"replay:{FIXTURES / 'single_repo'}")
record, commits = run_single_repo(client, "octocat", "Hello-World")

s = record.summary
print(f"{s.full_name}: {s.stars} stars, {len(record.pulls)} pull requests, "
      f"{len(record.issues)} issues, {len(commits)} commits")

# Issues that are really pull requests were dropped during extraction.
issue_numbers = {i.issue_number for i in record.issues}
assert issue_numbers.isdisjoint(p.pr_number for p in record.pulls)

rows = [[r.login, r.commit_count, r.percent] for r in contribution_report(record.contributors)]
print(format_table(["contributor", "commits", "percent"], rows))

print("\nlatest commits:")
for c in commits[:3]:
    print(f"  {c.sha[:10]} {c.author_login or '?':<10} {c.message.splitlines()[0]}")
