"""Record API traffic once, then replay it offline with no network access.

Here an in-memory stand-in plays the role of the live service. Against the
real API pass ``record("https://api.github.com", out_dir, token=...)`` with
no ``inner`` transport. Tokens never reach the fixture files.

Run from the repository root:  python3 demos/04_record_and_replay.py
"""

import random
import tempfile
from pathlib import Path

from repominer import ApiRequest, Credentials, GitHubClient, ReplayTransport, UnmatchedRequest, record
from repominer.synthetic import RepoData, SyntheticGitHub

releases = [{"id": i, "tag_name": f"v{i}"} for i in range(1, 251)]
live = SyntheticGitHub([RepoData({"id": 1, "full_name": "o/r", "owner": {"login": "o"},
                                  "stargazers_count": 0, "forks_count": 0}, releases=releases)])

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    token = "ghp_example%06d" % random.randrange(10**6)
    client = record("https://api.github.com", out, token=token, inner=live)
    fetched = client.fetch_all(ApiRequest("/repos/o/r/releases"), Credentials("o", token))
    client.transport.save()
    files = sorted(p.name for p in out.iterdir())
    print(f"recorded {len(fetched)} releases into {len(files) - 1} fixture files + index.json")
    print("token present in fixtures:", any(token in (out / f).read_text() for f in files))

    replay = ReplayTransport(out)
    offline = GitHubClient(base_url="https://api.github.com", transport=replay)
    again = offline.fetch_all(ApiRequest("/repos/o/r/releases"))
    print(f"replayed {len(again)} releases using {len(replay.log)} requests; identical: {again == fetched}")

    try:
        offline.execute(ApiRequest("/repos/o/other"))
    except UnmatchedRequest as exc:
        print("strict replay refuses unrecorded requests:", exc)
