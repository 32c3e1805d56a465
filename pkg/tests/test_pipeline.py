from __future__ import annotations

import pytest

from churnscope import pipeline
from churnscope.model import MethodStats, WindowConfig, utc_day
from churnscope.parsing import MethodIdentity
from churnscope.pipeline import ProcessSummary, RunConfig, StoreLocked, default_db_path, process_window
from churnscope.store import open_store
from churnscope.synthetic import BASE_TIME, RepoBuilder, build_history, random_history
from conftest import DAY, java_class, java_method
from filelock import FileLock

PATH = "src/p/A.java"
STEPS = ["int total = 0;", "for (int i = 0; i < n; i++) {", "total += i;", "}", "return total;"]


def a_source(f_name="f", f_extra=(), g_extra=()):
    return java_class(
        "A",
        java_method(f_name, STEPS[:-1] + list(f_extra) + STEPS[-1:], "int n", "int")
        + java_method("g", ["log(\"g\");"] + list(g_extra)),
    )


def ident(name, params=()):
    return MethodIdentity(PATH, f"p.A#{name}", tuple(params))


def config(path, **kw) -> RunConfig:
    kw.setdefault("window", WindowConfig(days=30, end_time=BASE_TIME + 20 * DAY))
    return RunConfig(repo_path=path, **kw)


def stats_of(cfg: RunConfig) -> dict:
    with open_store(cfg.db_path or default_db_path(cfg.repo_path)) as store:
        return {s.identity: s.daily for s in store.load_window(cfg.window)}


@pytest.fixture
def repo(tmp_path):
    return RepoBuilder(tmp_path / "repo")


def test_edit_counts_on_commit_day(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(f_extra=["total++;"])}, BASE_TIME + DAY + 5)
    repo.build()
    cfg = config(repo.path)
    summary = process_window(cfg)
    assert summary.commits_processed == 2
    assert stats_of(cfg) == {ident("f", ["int"]): {utc_day(BASE_TIME + DAY): 1}}


def test_rename_only_commit(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(f_extra=["total++;"])}, BASE_TIME + 10)
    repo.commit({PATH: a_source("h", f_extra=["total++;"])}, BASE_TIME + DAY)
    repo.build()
    cfg = config(repo.path)
    summary = process_window(cfg)
    assert summary.events_by_kind == {"RenameMethod": 1}
    assert stats_of(cfg) == {ident("h", ["int"]): {utc_day(BASE_TIME): 1, utc_day(BASE_TIME + DAY): 1}}


def test_non_source_commit_marks_processed(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({"README.md": "docs\n"}, BASE_TIME + 10)
    repo.build()
    cfg = config(repo.path)
    process_window(cfg)
    with open_store(default_db_path(repo.path)) as store:
        assert store.is_processed(repo.shas[2])
        assert store.load_window(cfg.window) == []


def test_rerun_processes_nothing(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(g_extra=["x();"])}, BASE_TIME + 10)
    repo.build()
    cfg = config(repo.path)
    first = process_window(cfg)
    second = process_window(cfg)
    assert (first.commits_processed, second.commits_processed) == (2, 0)
    assert second.commits_seen == second.commits_processed + second.commits_skipped_cached == 2


def test_incremental_equals_full_rescan(repo, tmp_path):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(g_extra=["x();"])}, BASE_TIME + 10)
    repo.build()
    inc = config(repo.path, db_path=tmp_path / "inc.db")
    process_window(inc)
    repo.commit({PATH: a_source(f_extra=["y();"], g_extra=["x();"])}, BASE_TIME + 20)
    repo.build()
    assert process_window(inc).commits_processed == 1
    full = config(repo.path, db_path=tmp_path / "full.db")
    process_window(full)
    with open_store(inc.db_path) as a, open_store(full.db_path) as b:
        assert a.dump() == b.dump()


def test_file_rename_keeps_identity_history(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(g_extra=["x();"])}, BASE_TIME + 10)
    repo.commit({PATH: None, "src/q/A.java": a_source(g_extra=["x();", "y();"])}, BASE_TIME + 20)
    repo.build()
    cfg = config(repo.path)
    process_window(cfg)
    moved = MethodIdentity("src/q/A.java", "p.A#g", ())
    assert stats_of(cfg) == {moved: {utc_day(BASE_TIME): 2}}


def test_deleted_method_is_dropped(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(g_extra=["x();"])}, BASE_TIME + 10)
    repo.commit({PATH: java_class("A", java_method("f", STEPS, "int n", "int"))}, BASE_TIME + 20)
    repo.build()
    cfg = config(repo.path)
    process_window(cfg)
    assert stats_of(cfg) == {}


def test_crash_leaves_commit_unprocessed(repo, monkeypatch):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(f_extra=["z();"], g_extra=["x();"])}, BASE_TIME + 10)
    repo.build()
    cfg = config(repo.path)

    real = pipeline.apply_refactorings
    calls = []

    def boom(*args, **kwargs):
        calls.append(1)
        if len(calls) == 2:
            raise RuntimeError("killed")
        return real(*args, **kwargs)

    monkeypatch.setattr(pipeline, "apply_refactorings", boom)
    with pytest.raises(RuntimeError):
        process_window(cfg)
    with open_store(default_db_path(repo.path)) as store:
        assert store.is_processed(repo.shas[1])
        assert not store.is_processed(repo.shas[2])
        # the Modified increments of the failed commit were rolled back with it
        assert store.load_window(cfg.window) == []
    monkeypatch.undo()
    assert process_window(cfg).commits_processed == 1
    assert set(stats_of(cfg)) == {ident("f", ["int"]), ident("g")}


def test_store_is_locked_for_second_writer(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.build()
    cfg = config(repo.path)
    db = default_db_path(repo.path)
    db.parent.mkdir(parents=True)
    with FileLock(str(db) + ".lock"):
        with pytest.raises(StoreLocked):
            process_window(cfg)


def test_rebuild_drops_store(repo):
    repo.commit({PATH: a_source()}, BASE_TIME)
    repo.commit({PATH: a_source(g_extra=["x();"])}, BASE_TIME + 10)
    repo.build()
    cfg = config(repo.path)
    process_window(cfg)
    with open_store(default_db_path(repo.path)) as store:
        store.upsert_stats(MethodStats.single(ident("bogus"), utc_day(BASE_TIME)))
    again = process_window(config(repo.path, rebuild=True))
    assert again.commits_processed == 2
    assert ident("bogus") not in stats_of(cfg)


def test_full_runs_are_deterministic(tmp_path):
    commits = random_history(7, 15, refactorings=True)
    build_history(tmp_path / "r", commits)
    window = WindowConfig(days=30, end_time=commits[-1].timestamp)
    dumps = []
    for name in ("one.db", "two.db"):
        cfg = RunConfig(repo_path=tmp_path / "r", window=window, db_path=tmp_path / name)
        process_window(cfg)
        with open_store(cfg.db_path) as store:
            dumps.append(store.dump())
    assert dumps[0] == dumps[1]


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(top_n=0)
    with pytest.raises(ValueError):
        RunConfig(output="pdf")
    assert RunConfig().top_n == 10 and RunConfig().window.days == 7


def test_summary_merge():
    a = ProcessSummary(1, 1, 0, 2, 0)
    a.events_by_kind["RenameMethod"] += 1
    b = ProcessSummary(2, 1, 1, 3, 1)
    b.events_by_kind["RenameMethod"] += 2
    a.merge(b)
    assert a.as_dict() == {
        "commits_seen": 3, "commits_processed": 2, "commits_skipped_cached": 1,
        "files_parsed": 5, "parse_failures": 1, "events_by_kind": {"RenameMethod": 3},
    }
