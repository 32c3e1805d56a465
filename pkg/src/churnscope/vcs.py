"""Read-only access to Git history through the ``git`` executable."""

from __future__ import annotations

import enum
import re
import subprocess
from collections import Counter
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

from churnscope.model import WindowConfig, has_extension

RENAME_THRESHOLD = 0.60

_HASH_RE = re.compile(r"[0-9a-f]{40}\Z")
_EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"
_REGULAR_MODES = {"100644", "100755"}


class VcsError(Exception):
    pass


class NoVcsRoot(VcsError):
    """No Git repository encloses the given path."""


class CorruptRepo(VcsError):
    """Git could not read the repository."""


@dataclass(frozen=True)
class CommitMeta:
    hash: str
    author: str
    timestamp: int
    parent_hashes: tuple[str, ...]
    message: str

    def __post_init__(self):
        if not _HASH_RE.match(self.hash):
            raise ValueError(f"not a full commit hash: {self.hash!r}")
        if self.timestamp <= 0:
            raise ValueError(f"commit {self.hash} has non-positive timestamp")


class FileChangeKind(str, enum.Enum):
    ADDED = "Added"
    DELETED = "Deleted"
    MODIFIED = "Modified"
    RENAMED = "Renamed"


@dataclass(frozen=True)
class FileChange:
    path_before: str | None
    path_after: str | None
    kind: FileChangeKind
    content_before: str | None
    content_after: str | None

    def __post_init__(self):
        k = self.kind
        if k is FileChangeKind.ADDED and (self.path_before or self.content_before is not None):
            raise ValueError("an added file has no before side")
        if k is FileChangeKind.DELETED and (self.path_after or self.content_after is not None):
            raise ValueError("a deleted file has no after side")
        if k in (FileChangeKind.MODIFIED, FileChangeKind.RENAMED) and (
            self.content_before is None or self.content_after is None
        ):
            raise ValueError(f"{k.value} needs both revisions")
        if k is FileChangeKind.RENAMED and self.path_before == self.path_after:
            raise ValueError("a rename must change the path")

    @property
    def path(self) -> str:
        return self.path_after or self.path_before  # type: ignore[return-value]


def decode(data: bytes) -> str:
    return data.decode("utf-8", errors="replace")


def is_binary(data: bytes) -> bool:
    return b"\0" in data[:8000]


class RepoHandle:
    """An opened working copy. Never writes to the repository."""

    def __init__(self, root: Path):
        self.root = root
        self._batch: subprocess.Popen | None = None

    def __repr__(self) -> str:
        return f"RepoHandle({str(self.root)!r})"

    def __enter__(self) -> RepoHandle:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._batch is not None:
            self._batch.stdin.close()
            self._batch.wait()
            self._batch = None

    def git(self, *args: str, check: bool = True) -> bytes:
        proc = subprocess.run(
            ["git", "-C", str(self.root), *args],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )
        if check and proc.returncode != 0:
            raise CorruptRepo(f"git {' '.join(args)} failed: {decode(proc.stderr).strip()}")
        return proc.stdout

    @property
    def head(self) -> str | None:
        """Hash of the checked-out commit, ``None`` on an unborn branch."""
        out = self.git("rev-parse", "--verify", "-q", "HEAD^{commit}", check=False).strip()
        return decode(out) or None

    def read_blob(self, sha: str) -> bytes:
        if self._batch is None:
            self._batch = subprocess.Popen(
                ["git", "-C", str(self.root), "cat-file", "--batch"],
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        self._batch.stdin.write(sha.encode() + b"\n")
        self._batch.stdin.flush()
        header = self._batch.stdout.readline().split()
        if len(header) != 3:
            raise CorruptRepo(f"object {sha} is missing")
        size = int(header[2])
        data = self._batch.stdout.read(size)
        self._batch.stdout.read(1)
        return data

    def read_file(self, rev: str, path: str) -> str | None:
        """Text of ``path`` at revision ``rev``, or ``None`` if absent or binary."""
        out = self.git("ls-tree", "-z", rev, "--", path, check=False)
        entry = out.split(b"\0")[0]
        if not entry:
            return None
        mode, kind, sha = entry.split(b"\t")[0].split()
        if kind != b"blob" or decode(mode) not in _REGULAR_MODES:
            return None
        data = self.read_blob(decode(sha))
        return None if is_binary(data) else decode(data)

    def read_head_file(self, path: str) -> str | None:
        """Text of ``path`` at HEAD, or ``None`` if absent or binary."""
        if self.head is None:
            return None
        return self.read_file("HEAD", path)


def open_repo(path: str | PathLike) -> RepoHandle:
    """Find the repository enclosing ``path``, searching upward."""
    start = Path(path).resolve()
    if not start.exists():
        raise NoVcsRoot(f"{path} does not exist")
    if start.is_file():
        start = start.parent
    for candidate in (start, *start.parents):
        if (candidate / ".git").exists():
            repo = RepoHandle(candidate)
            proc = subprocess.run(
                ["git", "-C", str(candidate), "rev-parse", "--git-dir"],
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
            )
            if proc.returncode != 0:
                raise CorruptRepo(f"{candidate}: {decode(proc.stderr).strip()}")
            return repo
    raise NoVcsRoot(f"no Git repository found at or above {start}")


def list_commits(repo: RepoHandle, window: WindowConfig) -> list[CommitMeta]:
    """First-parent commits of HEAD authored inside the window, oldest first."""
    if repo.head is None:
        return []
    out = repo.git("log", "--first-parent", "-z", "--format=%H%x1f%an%x1f%at%x1f%P%x1f%B", "HEAD")
    commits = []
    for record in out.split(b"\0"):
        if not record.strip():
            continue
        fields = decode(record).lstrip("\n").split("\x1f", 4)
        commit_hash, author, stamp, parents, message = fields
        timestamp = int(stamp)
        if not window.contains_time(timestamp):
            continue
        commits.append(CommitMeta(commit_hash, author, timestamp, tuple(parents.split()), message))
    commits.sort(key=lambda c: (c.timestamp, c.hash))
    return commits


def line_similarity(a: str, b: str) -> float:
    """Share of identical lines, relative to the longer text."""
    la, lb = a.splitlines(), b.splitlines()
    if not la and not lb:
        return 1.0 if a == b else 0.0
    common = sum((Counter(la) & Counter(lb)).values())
    return common / max(len(la), len(lb))


def pair_renames(
    deleted: dict[str, str], added: dict[str, str], threshold: float = RENAME_THRESHOLD
) -> list[tuple[str, str]]:
    """Greedily pair deleted and added paths whose contents are similar enough."""
    scored = []
    sizes = {p: len(t.splitlines()) for p, t in {**deleted, **added}.items()}
    for old, old_text in deleted.items():
        for new, new_text in added.items():
            if old_text == new_text:
                score = 1.0
            else:
                small, large = sorted((sizes[old], sizes[new]))
                if large == 0 or small / large < threshold:
                    continue
                score = line_similarity(old_text, new_text)
            if score >= threshold:
                scored.append((-score, old, new))
    scored.sort()
    used_old: set[str] = set()
    used_new: set[str] = set()
    pairs = []
    for _, old, new in scored:
        if old in used_old or new in used_new:
            continue
        used_old.add(old)
        used_new.add(new)
        pairs.append((old, new))
    return pairs


def commit_file_changes(
    repo: RepoHandle,
    commit: CommitMeta,
    source_extensions: frozenset[str] | set[str] = frozenset({".java"}),
) -> list[FileChange]:
    """Source files that differ between ``commit`` and its first parent."""
    base = commit.parent_hashes[0] if commit.parent_hashes else _EMPTY_TREE
    out = repo.git("diff-tree", "-r", "-z", "--no-renames", "--raw", "--no-abbrev", base, commit.hash)
    parts = out.split(b"\0")
    added: dict[str, str] = {}
    deleted: dict[str, str] = {}
    modified: list[FileChange] = []
    i = 0
    while i + 1 < len(parts):
        meta = decode(parts[i])
        path = decode(parts[i + 1])
        i += 2
        if not meta.startswith(":"):
            continue
        old_mode, new_mode, old_sha, new_sha, status = meta[1:].split()
        if not has_extension(path, source_extensions):
            continue
        old_ok = old_mode in _REGULAR_MODES
        new_ok = new_mode in _REGULAR_MODES
        before = after = None
        if old_ok:
            raw = repo.read_blob(old_sha)
            before = None if is_binary(raw) else decode(raw)
        if new_ok:
            raw = repo.read_blob(new_sha)
            after = None if is_binary(raw) else decode(raw)
        if (old_ok and before is None) or (new_ok and after is None):
            continue
        if before is not None and after is not None:
            modified.append(FileChange(path, path, FileChangeKind.MODIFIED, before, after))
        elif after is not None:
            added[path] = after
        elif before is not None:
            deleted[path] = before

    changes = list(modified)
    for old, new in pair_renames(deleted, added):
        changes.append(FileChange(old, new, FileChangeKind.RENAMED, deleted.pop(old), added.pop(new)))
    changes.extend(FileChange(None, p, FileChangeKind.ADDED, None, t) for p, t in added.items())
    changes.extend(FileChange(p, None, FileChangeKind.DELETED, t, None) for p, t in deleted.items())
    changes.sort(key=lambda c: (c.path, c.path_before or ""))
    return changes
