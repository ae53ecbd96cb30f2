"""Build a filtered dataset for one topic from recorded API responses.

The search stage asks for repositories under the topic sorted by stars, then
three filters narrow the set: stars and forks, release count, contributor
count. The manifest keeps the size of the set after each stage.

Run from the repository root:  python3 demos/01_build_dataset.py
"""

from pathlib import Path

from repominer import Extractor, FilterCriteria, GitHubClient

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

client = GitHubClient(base_url=f"replay:{FIXTURES / 'parsers'}")
criteria = FilterCriteria("parsers", min_stars=10, min_releases=1, min_contributors=2)
records, manifest = Extractor(client).run_dataset(criteria)

for label, count in manifest.funnel():
    print(f"{label:<20} {count}")

print()
for record in records[:5]:
    s = record.summary
    langs = ", ".join(record.languages.prominent) or "-"
    print(f"{s.full_name:<28} stars={s.stars:<5} releases={len(record.releases):<3} "
          f"contributors={len(record.contributors):<3} languages={langs}")
