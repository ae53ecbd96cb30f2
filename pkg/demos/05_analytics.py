"""Percentage reports computed exactly and rounded only when displayed.

Rounded shares may not add up to exactly 100, but they never miss by more
than 0.01 per entry beyond the first.

Run from the repository root:  python3 demos/05_analytics.py
"""

from repominer import Contributor, UserProfile, classify_languages, contribution_report, user_language_report

people = [Contributor("ada", 1, 1), Contributor("bob", 2, 1), Contributor("cy", 3, 1)]
report = contribution_report(people)
for r in report:
    print(f"{r.login:<5} {r.percent:>6}  exact {r.exact}")
print("rendered total:", sum(r.percent for r in report))

# Scaling every count leaves the shares unchanged.
scaled = contribution_report([Contributor(p.login, p.contributor_id, p.commit_count * 7) for p in people])
print("scale invariant:", [r.percent for r in scaled] == [r.percent for r in report])

# A language is prominent when it holds at least 10% of a repository's bytes.
breakdown = classify_languages({"C": 9000, "Shell": 950, "Makefile": 50})
print("prominent:", list(breakdown.prominent), "others:", list(breakdown.others))

profile = UserProfile("me", 1, "", 2, 0, (), {
    "me/a": classify_languages({"Python": 300, "C": 100}),
    "me/b": classify_languages({"C": 100}),
})
for r in user_language_report(profile):
    print(f"{r.language:<7} {r.byte_count:>4} bytes {r.percent:>6}%")
