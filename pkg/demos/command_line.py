"""Drive the ``churnscope`` command line against a small generated repository.

The same calls work from a shell, e.g. ``churnscope hotspots --repo PATH``.
"""

import tempfile
from pathlib import Path

from churnscope.cli import main
from churnscope.synthetic import build_history, random_history

workdir = Path(tempfile.mkdtemp(prefix="churnscope-cli-"))
commits = random_history(seed=5, n_commits=30, refactorings=True)
builder, _ = build_history(workdir / "repo", commits)
repo = str(builder.path)
end = str(commits[-1].timestamp)  # pin the window so the demo is reproducible


def run(*args):
    print(f"\n$ churnscope {' '.join(args)}")
    code = main(list(args))
    print(f"[exit {code}]")


run("scan", "--repo", repo, "--end-time", end)
run("scan", "--repo", repo, "--end-time", end)          # nothing left to do
run("hotspots", "--repo", repo, "--end-time", end, "--top", "5")
some_file = next(Path(repo).rglob("*.java")).relative_to(repo)
run("annotate", str(some_file), "--repo", repo, "--end-time", end)
run("export-html", "--repo", repo, "--end-time", end, "--out", str(workdir / "html"))
run("hotspots", "--repo", str(workdir))                  # not a repository: exit 2
run("scan", "--days", "0")                               # usage error: exit 1
