"""Write a dataset to CSV and SQLite, then read it back.

Both outputs carry the same rows. The CSV set can be parsed back into the
original records, and every child row refers to a repository row.

Run from the repository root:  python3 demos/06_export.py
"""

import sqlite3
import tempfile
from pathlib import Path

from repominer import Extractor, FilterCriteria, GitHubClient, export_csv, export_db, read_csv_records

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

client = GitHubClient(base_url=f"replay:{FIXTURES / 'compilers'}")
records, manifest = Extractor(client).run_dataset(FilterCriteria("compilers"))

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    bundle = export_csv(records, manifest, out)
    export_db(records, manifest, out / "dataset.db")

    with sqlite3.connect(out / "dataset.db") as conn:
        for table, n in bundle.row_counts().items():
            in_db = conn.execute(f"SELECT COUNT(*) FROM {table}").fetchone()[0]
            print(f"{table:<16} csv={n:<4} db={in_db}")
        orphans = conn.execute("PRAGMA foreign_key_check").fetchall()
    print("orphan rows:", len(orphans))

    back = read_csv_records(out)
    print("round trip equal:", sorted(back, key=lambda r: r.summary.repo_id)
          == sorted(records, key=lambda r: r.summary.repo_id))
    print((out / "manifest.json").read_text())
