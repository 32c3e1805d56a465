"""Track how often each Java method changes in a Git repository.

Typical use goes through the command line (``churnscope scan`` followed by
``churnscope hotspots``); the functions below are the same pipeline as a
library.
"""

from churnscope.diffing import ChangeKind, MethodMatching, classify_changes, match_methods
from churnscope.model import ChangeModel, MethodStats, WindowConfig
from churnscope.parsing import MethodDecl, MethodIdentity, ParseResult, extract_methods, normalize_tokens
from churnscope.pipeline import ProcessSummary, RunConfig, process_commit, process_window
from churnscope.refactoring import (
    RefactoringEvent,
    RefactoringKind,
    Thresholds,
    apply_refactorings,
    detect_refactorings,
    dice,
)
from churnscope.report import annotate_file, render_hotspots, render_html, render_json
from churnscope.store import ProcessedCommit, StatsStore, StoreCorrupt, open_store
from churnscope.vcs import (
    CommitMeta,
    CorruptRepo,
    FileChange,
    FileChangeKind,
    NoVcsRoot,
    RepoHandle,
    commit_file_changes,
    list_commits,
    open_repo,
)

__version__ = "0.1.0"

__all__ = [
    "ChangeKind",
    "ChangeModel",
    "CommitMeta",
    "CorruptRepo",
    "FileChange",
    "FileChangeKind",
    "MethodDecl",
    "MethodIdentity",
    "MethodMatching",
    "MethodStats",
    "NoVcsRoot",
    "ParseResult",
    "ProcessSummary",
    "ProcessedCommit",
    "RefactoringEvent",
    "RefactoringKind",
    "RepoHandle",
    "RunConfig",
    "StatsStore",
    "StoreCorrupt",
    "Thresholds",
    "WindowConfig",
    "annotate_file",
    "apply_refactorings",
    "classify_changes",
    "commit_file_changes",
    "detect_refactorings",
    "dice",
    "extract_methods",
    "list_commits",
    "match_methods",
    "normalize_tokens",
    "open_repo",
    "open_store",
    "process_commit",
    "process_window",
    "render_hotspots",
    "render_html",
    "render_json",
]
