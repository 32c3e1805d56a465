"""SQLite persistence for per-method statistics and processed commits."""

from __future__ import annotations

import sqlite3
from contextlib import contextmanager
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

from churnscope.model import MethodStats, WindowConfig
from churnscope.parsing import MethodIdentity

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE meta (schema_version INT);
CREATE TABLE processed_commits (hash TEXT PRIMARY KEY, processed_at INT);
CREATE TABLE method_stats (
    id TEXT PRIMARY KEY,
    file_path TEXT,
    qualified_name TEXT,
    total_changes INT
);
CREATE TABLE daily_changes (
    id TEXT,
    day TEXT,
    count INT,
    PRIMARY KEY (id, day)
);
CREATE INDEX method_stats_file ON method_stats (file_path);
"""

_TABLES = {"meta", "processed_commits", "method_stats", "daily_changes"}


class StoreError(Exception):
    """Base class for store failures."""


class StoreCorrupt(StoreError):
    """The database file is unreadable or has an unexpected schema."""


@dataclass(frozen=True)
class ProcessedCommit:
    hash: str
    processed_at: int


class StatsStore:
    """Handle on one repository's statistics database.

    Statements outside :meth:`transaction` commit immediately. Inside it,
    everything commits or rolls back together.
    """

    def __init__(self, conn: sqlite3.Connection, path: Path | None = None):
        self._conn = conn
        self.path = path
        self._depth = 0

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> StatsStore:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @contextmanager
    def transaction(self):
        if self._depth:
            self._depth += 1
            try:
                yield self
            finally:
                self._depth -= 1
            return
        self._execute("BEGIN IMMEDIATE")
        self._depth = 1
        try:
            yield self
        except BaseException:
            self._depth = 0
            if self._conn.in_transaction:
                self._conn.execute("ROLLBACK")
            raise
        self._depth = 0
        self._execute("COMMIT")

    def _execute(self, sql: str, params=()) -> sqlite3.Cursor:
        try:
            return self._conn.execute(sql, params)
        except sqlite3.DatabaseError as ex:
            if isinstance(ex, sqlite3.IntegrityError):
                raise
            raise StoreCorrupt(str(ex)) from ex

    @property
    def schema_version(self) -> int:
        return self._execute("SELECT schema_version FROM meta").fetchone()[0]

    # -- mutation ----------------------------------------------------------

    def upsert_stats(self, stats: MethodStats) -> None:
        """Add ``stats`` to whatever is stored for its identity."""
        daily = {d: c for d, c in stats.daily.items() if c}
        if not daily:
            return
        ident = stats.identity
        added = sum(daily.values())
        with self.transaction():
            self._execute(
                "INSERT INTO method_stats (id, file_path, qualified_name, total_changes) "
                "VALUES (?, ?, ?, ?) "
                "ON CONFLICT (id) DO UPDATE SET total_changes = total_changes + excluded.total_changes",
                (ident.canonical, ident.file_path, ident.qualified_name, added),
            )
            for day, count in sorted(daily.items()):
                self._execute(
                    "INSERT INTO daily_changes (id, day, count) VALUES (?, ?, ?) "
                    "ON CONFLICT (id, day) DO UPDATE SET count = count + excluded.count",
                    (ident.canonical, day, count),
                )

    def rekey_stats(self, old: MethodIdentity, new: MethodIdentity) -> None:
        """Move all rows of ``old`` to ``new``, merging additively."""
        if old == new:
            return
        existing = self.load_stats(old)
        if existing is None:
            return
        with self.transaction():
            self.delete_stats(old)
            self.upsert_stats(MethodStats(new, existing.total_changes, existing.daily))

    def delete_stats(self, identity: MethodIdentity) -> None:
        with self.transaction():
            self._execute("DELETE FROM daily_changes WHERE id = ?", (identity.canonical,))
            self._execute("DELETE FROM method_stats WHERE id = ?", (identity.canonical,))

    def mark_processed(self, commit: ProcessedCommit) -> None:
        self._execute(
            "INSERT OR IGNORE INTO processed_commits (hash, processed_at) VALUES (?, ?)",
            (commit.hash, commit.processed_at),
        )

    def is_processed(self, commit_hash: str) -> bool:
        row = self._execute("SELECT 1 FROM processed_commits WHERE hash = ?", (commit_hash,)).fetchone()
        return row is not None

    def prune(self, window: WindowConfig) -> int:
        """Drop daily rows before the window; returns the number removed."""
        first_day = window.day_keys()[0]
        with self.transaction():
            removed = self._execute("DELETE FROM daily_changes WHERE day < ?", (first_day,)).rowcount
            self._execute(
                "UPDATE method_stats SET total_changes = "
                "(SELECT COALESCE(SUM(count), 0) FROM daily_changes d WHERE d.id = method_stats.id)"
            )
            self._execute("DELETE FROM method_stats WHERE total_changes = 0")
        return removed

    # -- queries -----------------------------------------------------------

    def _collect(self, rows) -> list[MethodStats]:
        by_id: dict[str, MethodStats] = {}
        for ident, day, count in rows:
            stats = by_id.get(ident)
            if stats is None:
                stats = by_id[ident] = MethodStats(MethodIdentity.parse(ident))
            stats.daily[day] = count
            stats.total_changes += count
        return sorted(by_id.values(), key=lambda s: s.identity.canonical)

    def load_stats(self, identity: MethodIdentity) -> MethodStats | None:
        """All-time statistics for one method, or ``None``."""
        rows = self._execute(
            "SELECT id, day, count FROM daily_changes WHERE id = ? ORDER BY day", (identity.canonical,)
        ).fetchall()
        found = self._collect(rows)
        return found[0] if found else None

    def _window_rows(self, window: WindowConfig, where: str = "", params=()):
        days = window.day_keys()
        sql = (
            "SELECT d.id, d.day, d.count FROM daily_changes d JOIN method_stats m ON m.id = d.id "
            "WHERE d.day >= ? AND d.day <= ? AND d.count > 0" + where + " ORDER BY d.id, d.day"
        )
        return self._execute(sql, (days[0], days[-1], *params)).fetchall()

    def load_file_stats(self, file_path: str, window: WindowConfig) -> list[MethodStats]:
        return self._collect(self._window_rows(window, " AND m.file_path = ?", (file_path,)))

    def load_window(self, window: WindowConfig) -> list[MethodStats]:
        """Every method with at least one change inside the window."""
        return self._collect(self._window_rows(window))

    def top_hotspots(self, n: int, window: WindowConfig) -> list[MethodStats]:
        if n < 1:
            raise ValueError("n must be positive")
        stats = self.load_window(window)
        stats.sort(key=lambda s: (-s.total_changes, s.identity.canonical))
        return stats[:n]

    def dump(self, include_processed_at: bool = False) -> list[tuple]:
        """Sorted content of every table, for equivalence checks."""
        out: list[tuple] = [("meta", self.schema_version)]
        for row in self._execute("SELECT hash, processed_at FROM processed_commits ORDER BY hash"):
            out.append(("processed", row[0], row[1] if include_processed_at else None))
        out.extend(
            ("method",) + tuple(row)
            for row in self._execute(
                "SELECT id, file_path, qualified_name, total_changes FROM method_stats ORDER BY id"
            )
        )
        out.extend(
            ("daily",) + tuple(row)
            for row in self._execute("SELECT id, day, count FROM daily_changes ORDER BY id, day")
        )
        return out


def open_store(db_path: str | PathLike) -> StatsStore:
    """Open or create the statistics database at ``db_path``."""
    path = Path(db_path)
    try:
        conn = sqlite3.connect(path, isolation_level=None)
    except sqlite3.Error as ex:
        raise StoreCorrupt(f"cannot open {path}: {ex}") from ex
    store = StatsStore(conn, path)
    try:
        tables = {r[0] for r in store._execute("SELECT name FROM sqlite_master WHERE type = 'table'")}
        if not tables:
            with store.transaction():
                for statement in _SCHEMA.strip().split(";"):
                    if statement.strip():
                        store._execute(statement)
                store._execute("INSERT INTO meta (schema_version) VALUES (?)", (SCHEMA_VERSION,))
        elif not _TABLES <= tables:
            raise StoreCorrupt(f"{path} is not a statistics database (tables: {sorted(tables)})")
        else:
            row = store._execute("SELECT schema_version FROM meta").fetchone()
            if row is None or row[0] != SCHEMA_VERSION:
                raise StoreCorrupt(f"{path} has unsupported schema version {row and row[0]}")
    except StoreCorrupt:
        conn.close()
        raise
    return store
