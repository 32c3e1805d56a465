"""Per-method change statistics and the time window they are counted over."""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone

from churnscope.parsing import MethodIdentity

SECONDS_PER_DAY = 86400

DEFAULT_DAYS = 7
DEFAULT_TOP_N = 10


def has_extension(path: str | None, extensions) -> bool:
    return path is not None and any(path.endswith(ext) for ext in extensions)


def utc_day(timestamp: int) -> str:
    """Calendar date (YYYY-MM-DD, UTC) of a POSIX timestamp."""
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date().isoformat()


@dataclass(frozen=True)
class WindowConfig:
    """Which commits to read and which days to report.

    Commits are selected on the closed interval
    ``[end_time - days * 86400, end_time]``. Reports cover the ``days``
    UTC calendar dates ending with the date of ``end_time``.
    """

    days: int = DEFAULT_DAYS
    end_time: int = field(default_factory=lambda: int(time.time()))
    source_extensions: frozenset[str] = frozenset({".java"})

    def __post_init__(self):
        if self.days < 1:
            raise ValueError(f"window must cover at least one day, got {self.days}")

    @property
    def start_time(self) -> int:
        return self.end_time - self.days * SECONDS_PER_DAY

    def contains_time(self, timestamp: int) -> bool:
        return self.start_time <= timestamp <= self.end_time

    def day_keys(self) -> list[str]:
        """The reported dates, oldest first."""
        last = date.fromisoformat(utc_day(self.end_time))
        return [(last - timedelta(days=k)).isoformat() for k in range(self.days - 1, -1, -1)]

    def matches_path(self, path: str | None) -> bool:
        return has_extension(path, self.source_extensions)


@dataclass
class MethodStats:
    identity: MethodIdentity
    total_changes: int = 0
    daily: dict[str, int] = field(default_factory=dict)

    @classmethod
    def single(cls, identity: MethodIdentity, day: str, count: int = 1) -> MethodStats:
        return cls(identity, count, {day: count})

    def restricted(self, window: WindowConfig) -> MethodStats:
        keys = set(window.day_keys())
        daily = {d: c for d, c in self.daily.items() if d in keys and c > 0}
        return MethodStats(self.identity, sum(daily.values()), daily)

    def histogram(self, window: WindowConfig) -> list[int]:
        return [self.daily.get(d, 0) for d in window.day_keys()]


class ChangeModel:
    """In-memory mirror of the stats store, grouped by file.

    Exposes the same mutation surface as :class:`churnscope.store.StatsStore`
    (``upsert_stats``, ``rekey_stats``, ``delete_stats``) so refactoring
    application can run against either.
    """

    def __init__(self):
        self.files: dict[str, dict[MethodIdentity, MethodStats]] = defaultdict(dict)

    def __contains__(self, identity: MethodIdentity) -> bool:
        return identity in self.files.get(identity.file_path, {})

    def __len__(self) -> int:
        return sum(len(v) for v in self.files.values())

    def get(self, identity: MethodIdentity) -> MethodStats | None:
        return self.files.get(identity.file_path, {}).get(identity)

    def all_stats(self) -> list[MethodStats]:
        return sorted(
            (s for per_file in self.files.values() for s in per_file.values()),
            key=lambda s: s.identity.canonical,
        )

    def upsert_stats(self, stats: MethodStats) -> None:
        if not stats.daily:
            return
        current = self.files[stats.identity.file_path].setdefault(
            stats.identity, MethodStats(stats.identity)
        )
        for day, count in stats.daily.items():
            current.daily[day] = current.daily.get(day, 0) + count
        current.total_changes += sum(stats.daily.values())

    def rekey_stats(self, old: MethodIdentity, new: MethodIdentity) -> None:
        if old == new:
            return
        stats = self.files.get(old.file_path, {}).pop(old, None)
        if stats is None:
            return
        if not self.files[old.file_path]:
            del self.files[old.file_path]
        self.upsert_stats(MethodStats(new, stats.total_changes, dict(stats.daily)))

    def delete_stats(self, identity: MethodIdentity) -> None:
        per_file = self.files.get(identity.file_path)
        if per_file is not None:
            per_file.pop(identity, None)
            if not per_file:
                del self.files[identity.file_path]
