"""Mine a generated Git repository and render every report format.

The repository comes from the same generator the tests use, so it has a
realistic mix of edits, renames, moves, extractions and inlines.
"""

import tempfile
from pathlib import Path

from churnscope import RunConfig, WindowConfig, annotate_file, open_store, process_window
from churnscope.report import method_lines, render_hotspots, render_html, render_json
from churnscope.synthetic import build_history, random_history
from churnscope.vcs import open_repo

workdir = Path(tempfile.mkdtemp(prefix="churnscope-demo-"))
commits = random_history(seed=11, n_commits=60, refactorings=True)
builder, _ = build_history(workdir / "repo", commits)
print(f"built {len(commits)} commits in {builder.path}")

window = WindowConfig(days=7, end_time=commits[-1].timestamp)
config = RunConfig(repo_path=builder.path, window=window)
summary = process_window(config)
print("first scan:", summary.as_dict())
print("second scan processed", process_window(config).commits_processed, "commits")

with open_repo(builder.path) as repo, open_store(builder.path / ".churnscope" / "stats.db") as store:
    top = store.top_hotspots(5, window)
    lines = {}
    for path in {s.identity.file_path for s in top}:
        lines.update(method_lines(repo.read_head_file(path), path))
    print()
    print(render_hotspots(top, 5, lines))

    hottest = top[0].identity.file_path
    source = repo.read_head_file(hottest)
    annotated = annotate_file(source, store.load_file_stats(hottest, window), window, hottest)
    print("\n".join(annotated.splitlines()[:30]))
    print("...")

    everything = store.load_window(window)
    (workdir / "report.json").write_text(render_json(everything, window, lines))
    pages = render_html(everything, window, workdir / "html", lines)

print(f"\nJSON export: {workdir / 'report.json'}")
print(f"HTML report: {pages[0]} ({len(pages)} pages)")
