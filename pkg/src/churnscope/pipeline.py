"""End-to-end processing: history -> parsed methods -> events -> store."""

from __future__ import annotations

import logging
import posixpath
import time
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock, Timeout

from churnscope.diffing import ChangeKind, MethodMatching, classify_changes, match_methods
from churnscope.model import DEFAULT_TOP_N, MethodStats, WindowConfig, utc_day
from churnscope.parsing import ParseResult, extract_methods_cached
from churnscope.refactoring import (
    RefactoringKind,
    Thresholds,
    apply_refactorings,
    detect_refactorings,
)
from churnscope.store import ProcessedCommit, StatsStore, StoreError, open_store
from churnscope.vcs import CommitMeta, FileChange, commit_file_changes, list_commits, open_repo

logger = logging.getLogger(__name__)

OUTPUTS = ("annotate", "hotspots", "json", "html")


class StoreLocked(StoreError):
    """Another pipeline instance holds the store."""


def default_db_path(repo_root: str | Path) -> Path:
    return Path(repo_root) / ".churnscope" / "stats.db"


@dataclass
class RunConfig:
    repo_path: Path = Path(".")
    window: WindowConfig = field(default_factory=WindowConfig)
    db_path: Path | None = None
    thresholds: Thresholds = field(default_factory=Thresholds)
    count_renames: bool = True
    output: str = "hotspots"
    top_n: int = DEFAULT_TOP_N
    rebuild: bool = False

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError("top_n must be at least 1")
        if self.output not in OUTPUTS:
            raise ValueError(f"output must be one of {OUTPUTS}")


@dataclass
class ProcessSummary:
    commits_seen: int = 0
    commits_processed: int = 0
    commits_skipped_cached: int = 0
    files_parsed: int = 0
    parse_failures: int = 0
    events_by_kind: Counter = field(default_factory=Counter)

    def merge(self, other: ProcessSummary) -> None:
        self.commits_seen += other.commits_seen
        self.commits_processed += other.commits_processed
        self.commits_skipped_cached += other.commits_skipped_cached
        self.files_parsed += other.files_parsed
        self.parse_failures += other.parse_failures
        self.events_by_kind.update(other.events_by_kind)

    def as_dict(self) -> dict:
        return {
            "commits_seen": self.commits_seen,
            "commits_processed": self.commits_processed,
            "commits_skipped_cached": self.commits_skipped_cached,
            "files_parsed": self.files_parsed,
            "parse_failures": self.parse_failures,
            "events_by_kind": {k.value if isinstance(k, RefactoringKind) else k: v
                               for k, v in sorted(self.events_by_kind.items())},
        }


def _parse(text: str | None, path: str | None) -> ParseResult:
    if text is None or path is None:
        return ParseResult()
    return extract_methods_cached(text, path)


def _complete_hierarchy(
    hierarchy: dict[str, str], class_paths: dict[str, str], lookup: Callable[[str], str | None]
) -> None:
    """Add superclasses the commit did not touch, found next to their subclass."""
    known = {q.rsplit(".", 1)[-1] for q in hierarchy}
    tried: set[str] = set()
    pending = sorted(hierarchy)
    while pending:
        cls = pending.pop()
        sup = hierarchy[cls]
        if sup in known or cls not in class_paths:
            continue
        candidate = posixpath.join(posixpath.dirname(class_paths[cls]), f"{sup}.java")
        if candidate in tried:
            continue
        tried.add(candidate)
        text = lookup(candidate)
        if text is None:
            continue
        for q, parent in extract_methods_cached(text, candidate).hierarchy.items():
            if q not in hierarchy:
                hierarchy[q] = parent
                class_paths[q] = candidate
                pending.append(q)
        known = {q.rsplit(".", 1)[-1] for q in hierarchy}


def analyze_changes(
    changes: list[FileChange],
    thresholds: Thresholds | None = None,
    lookup: Callable[[str], str | None] | None = None,
) -> tuple[list[MethodMatching], list, ProcessSummary]:
    """Parse, match and detect refactorings for one commit's file changes.

    ``lookup`` returns the text of another file at the commit; it is used
    to find superclasses the commit did not touch.
    """
    summary = ProcessSummary()
    matchings: list[MethodMatching] = []
    hierarchy: dict[str, str] = {}
    class_paths: dict[str, str] = {}
    for change in changes:
        before = _parse(change.content_before, change.path_before)
        after = _parse(change.content_after, change.path_after)
        summary.files_parsed += 1
        if before.degraded or after.degraded:
            summary.parse_failures += 1
            logger.info("skipping %s: file does not parse", change.path)
            continue
        for result, path in ((before, change.path_before), (after, change.path_after)):
            hierarchy.update(result.hierarchy)
            class_paths.update(dict.fromkeys(result.hierarchy, path))
        matchings.append(match_methods(before, after))
    if lookup is not None:
        _complete_hierarchy(hierarchy, class_paths, lookup)
    events = detect_refactorings(matchings, hierarchy, thresholds)
    return matchings, events, summary


def process_commit(
    commit: CommitMeta,
    changes: list[FileChange],
    store: StatsStore,
    thresholds: Thresholds | None = None,
    count_renames: bool = True,
    lookup: Callable[[str], str | None] | None = None,
) -> ProcessSummary:
    """Fold one commit into the store inside a single transaction."""
    if store.is_processed(commit.hash):
        return ProcessSummary(commits_seen=1, commits_skipped_cached=1)
    day = utc_day(commit.timestamp)
    matchings, events, summary = analyze_changes(changes, thresholds, lookup)
    summary.commits_seen = summary.commits_processed = 1
    summary.events_by_kind.update(e.kind for e in events)

    inline_hosts = {e.host for e in events if e.kind is RefactoringKind.INLINE_METHOD}
    consumed = {e.before for e in events if e.before is not None}

    with store.transaction():
        for m in matchings:
            for b, a in m.matched_pairs:
                if b.identity != a.identity:
                    store.rekey_stats(b.identity, a.identity)
        for m in matchings:
            for identity, kind in classify_changes(m):
                if kind is ChangeKind.MODIFIED and identity not in inline_hosts:
                    store.upsert_stats(MethodStats.single(identity, day))
                elif kind is ChangeKind.DELETED and identity not in consumed:
                    store.delete_stats(identity)
        apply_refactorings(store, events, day, count_renames)
        store.mark_processed(ProcessedCommit(commit.hash, int(time.time())))
    return summary


def process_window(config: RunConfig) -> ProcessSummary:
    """Bring the store up to date with every commit in the window."""
    repo = open_repo(config.repo_path)
    db_path = Path(config.db_path) if config.db_path else default_db_path(repo.root)
    db_path.parent.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(db_path) + ".lock")
    try:
        lock.acquire(timeout=0)
    except Timeout as ex:
        raise StoreLocked(f"{db_path} is in use by another process") from ex
    try:
        if config.rebuild and db_path.exists():
            db_path.unlink()
        summary = ProcessSummary()
        with repo, open_store(db_path) as store:
            for commit in list_commits(repo, config.window):
                if store.is_processed(commit.hash):
                    summary.commits_seen += 1
                    summary.commits_skipped_cached += 1
                    continue
                changes = commit_file_changes(repo, commit, config.window.source_extensions)
                def lookup(path: str, rev: str = commit.hash) -> str | None:
                    return repo.read_file(rev, path)

                summary.merge(
                    process_commit(
                        commit, changes, store, config.thresholds, config.count_renames, lookup
                    )
                )
        return summary
    finally:
        lock.release()
