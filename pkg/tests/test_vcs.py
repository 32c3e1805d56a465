from __future__ import annotations

import subprocess

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from churnscope.model import WindowConfig
from churnscope.synthetic import BASE_TIME, RepoBuilder, random_history, build_history
from churnscope.vcs import (
    CommitMeta,
    CorruptRepo,
    FileChange,
    FileChangeKind,
    NoVcsRoot,
    commit_file_changes,
    line_similarity,
    list_commits,
    open_repo,
)
from conftest import DAY, java_class, java_method

A = java_class("A", java_method("f", ["work(1);", "work(2);", "work(3);"]) + java_method("g", ["more();"]))


def git(path, *args) -> str:
    return subprocess.run(["git", "-C", str(path), *args], capture_output=True, text=True, check=True).stdout


def wide(end: int = BASE_TIME + 30 * DAY, days: int = 60) -> WindowConfig:
    return WindowConfig(days=days, end_time=end)


def test_open_repo_root_and_nested(repo_builder):
    repo_builder.commit({"src/p/A.java": A}, BASE_TIME)
    repo_builder.build()
    nested = repo_builder.path / "src" / "p"
    with open_repo(repo_builder.path) as r1, open_repo(nested) as r2, open_repo(nested / "A.java") as r3:
        assert r1.root == r2.root == r3.root == repo_builder.path.resolve()
        assert r1.head == repo_builder.shas[1]


def test_open_repo_empty_dir(tmp_path):
    with pytest.raises(NoVcsRoot):
        open_repo(tmp_path)


def test_open_repo_missing_path(tmp_path):
    with pytest.raises(NoVcsRoot):
        open_repo(tmp_path / "nope")


def test_open_repo_broken_git_dir(tmp_path):
    (tmp_path / ".git").mkdir()
    with pytest.raises(CorruptRepo):
        open_repo(tmp_path)


def test_unborn_branch_has_no_commits(repo_builder):
    with open_repo(repo_builder.path) as repo:
        assert repo.head is None
        assert list_commits(repo, wide()) == []


def test_list_commits_matches_git_log(repo_builder):
    for k in range(3):
        repo_builder.commit({"A.java": A + f"// {k}\n"}, BASE_TIME + k * 3600, f"c{k}")
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        commits = list_commits(repo, wide())
    oracle = git(repo_builder.path, "log", "--reverse", "--format=%H %at %s").split("\n")
    assert [f"{c.hash} {c.timestamp} {c.message.strip()}" for c in commits] == [x for x in oracle if x]
    assert [c.message.strip() for c in commits] == ["c0", "c1", "c2"]
    assert commits[1].parent_hashes == (commits[0].hash,)


def test_window_is_closed_interval(repo_builder):
    end = BASE_TIME + 7 * DAY
    stamps = [BASE_TIME - 1, BASE_TIME, BASE_TIME + DAY, end, end + 1]
    for k, t in enumerate(stamps):
        repo_builder.commit({"A.java": A + f"// {k}\n"}, t)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        got = [c.timestamp for c in list_commits(repo, WindowConfig(days=7, end_time=end))]
    assert got == [BASE_TIME, BASE_TIME + DAY, end]


def test_no_commits_in_window(repo_builder):
    repo_builder.commit({"A.java": A}, BASE_TIME)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        assert list_commits(repo, WindowConfig(days=1, end_time=BASE_TIME + 10 * DAY)) == []


def test_equal_timestamps_order_by_hash(repo_builder):
    for k in range(4):
        repo_builder.commit({"A.java": A + f"// {k}\n"}, BASE_TIME)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        commits = list_commits(repo, wide())
    assert [c.hash for c in commits] == sorted(c.hash for c in commits)


def test_merge_is_single_entry_diffed_against_first_parent(repo_builder):
    b = repo_builder
    root = b.commit({"A.java": A}, BASE_TIME, "root")
    side = b.commit({"B.java": java_class("B", java_method("h", ["x();"]))}, BASE_TIME + 10, "side", branch="topic", parents=[root])
    main = b.commit({"A.java": A.replace("work(1)", "work(9)")}, BASE_TIME + 20, "main")
    b.build(checkout=False)
    b.commit({"B.java": b.trees[side]["B.java"]}, BASE_TIME + 30, "merge", parents=[main, side])
    b.build()
    with open_repo(b.path) as repo:
        commits = list_commits(repo, wide())
        assert [c.message.strip() for c in commits] == ["root", "main", "merge"]
        merge_meta = commits[-1]
        assert len(merge_meta.parent_hashes) == 2
        changes = commit_file_changes(repo, merge_meta)
    assert [(c.kind, c.path) for c in changes] == [(FileChangeKind.ADDED, "B.java")]


def test_extension_filter_and_root_commit(repo_builder):
    repo_builder.commit({"README.md": "hi\n", "src/A.java": A}, BASE_TIME)
    repo_builder.commit({"README.md": "hello\n"}, BASE_TIME + 10)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        root, readme = list_commits(repo, wide())
        [added] = commit_file_changes(repo, root)
        assert added == FileChange(None, "src/A.java", FileChangeKind.ADDED, None, A)
        assert commit_file_changes(repo, readme) == []


def test_binary_blob_skipped(repo_builder):
    repo_builder.commit({"Bin.java": "class X {}\0\0binary"}, BASE_TIME)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        [c] = list_commits(repo, wide())
        assert commit_file_changes(repo, c) == []


def test_invalid_utf8_is_decoded_lossily(tmp_path):
    b = RepoBuilder(tmp_path / "r")
    b.commit({"A.java": A}, BASE_TIME)
    b.build()
    (b.path / "A.java").write_bytes(A.encode() + b"// \xff\xfe bad\n")
    subprocess.run(["git", "-C", str(b.path), "commit", "-qam", "bytes"], check=True,
                   env={"GIT_AUTHOR_DATE": f"{BASE_TIME + 5} +0000", "GIT_COMMITTER_DATE": f"{BASE_TIME + 5} +0000",
                        "GIT_AUTHOR_NAME": "a", "GIT_AUTHOR_EMAIL": "a@b", "GIT_COMMITTER_NAME": "a",
                        "GIT_COMMITTER_EMAIL": "a@b", "PATH": "/usr/bin:/bin", "HOME": str(tmp_path)})
    with open_repo(b.path) as repo:
        last = list_commits(repo, wide())[-1]
        [change] = commit_file_changes(repo, last)
    assert "�" in change.content_after


def _git_renames(path, sha) -> set[tuple[str, str]]:
    out = git(path, "diff-tree", "-r", "-M60%", "--name-status", "--no-commit-id", f"{sha}^", sha)
    return {tuple(line.split("\t")[1:]) for line in out.splitlines() if line.startswith("R")}


def test_pure_move_is_rename(repo_builder):
    repo_builder.commit({"src/A.java": A}, BASE_TIME)
    m = repo_builder.commit({"src/A.java": None, "lib/A.java": A}, BASE_TIME + 10)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        c = list_commits(repo, wide())[-1]
        [change] = commit_file_changes(repo, c)
    assert change.kind is FileChangeKind.RENAMED
    assert change.content_before == change.content_after
    assert {(change.path_before, change.path_after)} == _git_renames(repo_builder.path, repo_builder.shas[m])


@pytest.mark.parametrize("edited_lines", [1, 3, 12])
def test_rename_with_edits_agrees_with_git(repo_builder, edited_lines):
    body = [f"step{i}(value, {i});" for i in range(20)]
    text = java_class("A", java_method("f", body))
    lines = text.splitlines()
    for i in range(edited_lines):
        lines[5 + i] = lines[5 + i].replace("value", "other")
    edited = "\n".join(lines) + "\n"
    repo_builder.commit({"src/A.java": text}, BASE_TIME)
    m = repo_builder.commit({"src/A.java": None, "src/B.java": edited}, BASE_TIME + 10)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        c = list_commits(repo, wide())[-1]
        changes = commit_file_changes(repo, c)
    ours = {(c.path_before, c.path_after) for c in changes if c.kind is FileChangeKind.RENAMED}
    assert ours == _git_renames(repo_builder.path, repo_builder.shas[m])


def test_line_similarity():
    assert line_similarity("a\nb\nc\n", "a\nb\nc\n") == 1.0
    assert line_similarity("a\nb\n", "a\nx\ny\nz\n") == 0.25
    assert line_similarity("", "") == 1.0


def test_commit_meta_invariants():
    with pytest.raises(ValueError):
        CommitMeta("ABC", "a", 1, (), "m")
    with pytest.raises(ValueError):
        CommitMeta("a" * 40, "a", 0, (), "m")
    CommitMeta("a" * 40, "a", 1, (), "m")


@pytest.mark.parametrize(
    "args",
    [
        ("x", None, FileChangeKind.ADDED, None, "t"),
        (None, "x", FileChangeKind.ADDED, "t", "t"),
        ("x", "y", FileChangeKind.DELETED, "t", None),
        ("x", None, FileChangeKind.DELETED, "t", "t"),
        ("x", "x", FileChangeKind.MODIFIED, None, "t"),
        ("x", "x", FileChangeKind.RENAMED, "t", "t"),
    ],
)
def test_file_change_invariants(args):
    with pytest.raises(ValueError):
        FileChange(*args)


def _check_kind(c: FileChange):
    if c.kind is FileChangeKind.ADDED:
        assert c.path_before is None and c.content_before is None and c.content_after is not None
    elif c.kind is FileChangeKind.DELETED:
        assert c.path_after is None and c.content_after is None and c.content_before is not None
    else:
        assert c.content_before is not None and c.content_after is not None
        if c.kind is FileChangeKind.RENAMED:
            assert c.path_before != c.path_after


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_replay_reproduces_head(tmp_path_factory, seed):
    commits = random_history(seed, 12, refactorings=True)
    path = tmp_path_factory.mktemp("replay")
    build_history(path, commits)
    with open_repo(path) as repo:
        snapshot: dict[str, str] = {}
        metas = list_commits(repo, wide(end=commits[-1].timestamp, days=30))
        assert len(metas) == len(commits)
        keys = [(c.timestamp, c.hash) for c in metas]
        assert keys == sorted(set(keys))
        for meta in metas:
            for change in commit_file_changes(repo, meta):
                _check_kind(change)
                if change.path_before is not None:
                    snapshot.pop(change.path_before, None)
                if change.path_after is not None:
                    snapshot[change.path_after] = change.content_after
        head = {p: (path / p).read_text() for p in git(path, "ls-files").split()}
    assert snapshot == head


def test_read_file_at_revision(repo_builder):
    first = repo_builder.commit({"A.java": A, "bin.dat": "x\0y"}, BASE_TIME)
    repo_builder.commit({"A.java": A + "// v2\n"}, BASE_TIME + 10)
    repo_builder.build()
    with open_repo(repo_builder.path) as repo:
        assert repo.read_file(repo_builder.shas[first], "A.java") == A
        assert repo.read_head_file("A.java").endswith("// v2\n")
        assert repo.read_file("HEAD", "missing.java") is None
        assert repo.read_file("HEAD", "bin.dat") is None
