"""Heuristic method-level refactoring detection and its effect on statistics.

Detection runs over all method matchings of one commit in five ordered
passes. Structural matches are tried before similarity matches:

1. Move / Pull Up / Push Down: a deleted and an added method with the same
   name and parameter types in different classes.
2. Rename: a deleted and an added method in the same class with similar
   bodies.
3. Extract: an added method whose tokens were mostly removed from a
   modified method.
4. Inline: the mirror image of extract.
5. Rename-and-move: a deleted and an added method in different classes
   with near-identical bodies.

Every deleted or added method takes part in at most one event.
"""

from __future__ import annotations

import enum
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass

from churnscope.diffing import MethodMatching
from churnscope.parsing import MethodDecl, MethodIdentity
from churnscope.model import MethodStats


class RefactoringKind(str, enum.Enum):
    EXTRACT_METHOD = "ExtractMethod"
    EXTRACT_AND_MOVE = "ExtractAndMove"
    INLINE_METHOD = "InlineMethod"
    RENAME_METHOD = "RenameMethod"
    MOVE_METHOD = "MoveMethod"
    PULL_UP_METHOD = "PullUpMethod"
    PUSH_DOWN_METHOD = "PushDownMethod"


EXTRACT_KINDS = frozenset({RefactoringKind.EXTRACT_METHOD, RefactoringKind.EXTRACT_AND_MOVE})
REKEY_KINDS = frozenset(
    {
        RefactoringKind.RENAME_METHOD,
        RefactoringKind.MOVE_METHOD,
        RefactoringKind.PULL_UP_METHOD,
        RefactoringKind.PUSH_DOWN_METHOD,
    }
)


@dataclass(frozen=True)
class RefactoringEvent:
    kind: RefactoringKind
    before: MethodIdentity | None
    after: MethodIdentity
    host: MethodIdentity | None = None

    def __post_init__(self):
        if self.kind in EXTRACT_KINDS:
            if self.before is not None or self.host is None:
                raise ValueError(f"{self.kind.value} needs a host and no before identity")
        elif self.kind is RefactoringKind.INLINE_METHOD:
            if self.before is None or self.host is None:
                raise ValueError("InlineMethod needs both before and host identities")
        elif self.before is None or self.before == self.after:
            raise ValueError(f"{self.kind.value} needs distinct before and after identities")

    def key(self) -> tuple[str, str | None, str, str | None]:
        """Plain-string form, convenient for comparing against ground truth."""
        return (
            self.kind.value,
            self.before.canonical if self.before else None,
            self.after.canonical,
            self.host.canonical if self.host else None,
        )


@dataclass(frozen=True)
class Thresholds:
    rename: float = 0.75
    move: float = 0.60
    containment: float = 0.50
    rename_and_move: float = 0.85

    def __post_init__(self):
        for name in ("rename", "move", "containment", "rename_and_move"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"threshold {name} must lie in (0, 1], got {value}")


def dice(a: Iterable[str], b: Iterable[str]) -> float:
    """Dice coefficient of two token multisets; two empty bags score 1."""
    ca, cb = Counter(a), Counter(b)
    size = sum(ca.values()) + sum(cb.values())
    if size == 0:
        return 1.0
    return 2 * sum((ca & cb).values()) / size


def _dice_counts(ca: Counter, la: int, cb: Counter, lb: int) -> float:
    if la + lb == 0:
        return 1.0
    return 2 * sum((ca & cb).values()) / (la + lb)


def containment(part: Counter, total: int, pool: Counter) -> float:
    """Share of the ``part`` multiset found inside ``pool``."""
    if total == 0:
        return 0.0
    return sum((part & pool).values()) / total


class _Bag:
    __slots__ = ("decl", "counts", "size")

    def __init__(self, decl: MethodDecl):
        self.decl = decl
        self.counts = Counter(decl.body_tokens)
        self.size = len(decl.body_tokens)


def _simple(class_name: str) -> str:
    return class_name.rsplit(".", 1)[-1]


def is_subclass(child: str, ancestor: str, hierarchy: dict[str, str]) -> bool:
    """Whether ``ancestor`` appears on ``child``'s superclass chain.

    ``hierarchy`` maps qualified class names to simple superclass names, so
    each step resolves the simple name against the known classes, preferring
    one in the same package.
    """
    by_simple: dict[str, list[str]] = {}
    for q in hierarchy:
        by_simple.setdefault(_simple(q), []).append(q)
    target = _simple(ancestor)
    current, seen = child, set()
    while current not in seen:
        seen.add(current)
        sup = hierarchy.get(current)
        if sup is None:
            return False
        if sup == target:
            return True
        options = by_simple.get(sup)
        if not options:
            return False
        sibling = f"{current.rsplit('.', 1)[0]}.{sup}" if "." in current else sup
        current = sibling if sibling in options else sorted(options)[0]
    return False


def _move_kind(src: MethodDecl, dst: MethodDecl, hierarchy: dict[str, str]) -> RefactoringKind:
    if is_subclass(src.enclosing_class, dst.enclosing_class, hierarchy):
        return RefactoringKind.PULL_UP_METHOD
    if is_subclass(dst.enclosing_class, src.enclosing_class, hierarchy):
        return RefactoringKind.PUSH_DOWN_METHOD
    return RefactoringKind.MOVE_METHOD


def _could_reach(x: _Bag, y: _Bag, threshold: float) -> bool:
    total = x.size + y.size
    return total == 0 or 2 * min(x.size, y.size) / total >= threshold


def _greedy(candidates: list[tuple[float, str, str, _Bag, _Bag]]) -> list[tuple[_Bag, _Bag]]:
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_d: set[str] = set()
    used_a: set[str] = set()
    chosen = []
    for _, a_key, d_key, d, a in candidates:
        if d_key in used_d or a_key in used_a:
            continue
        used_d.add(d_key)
        used_a.add(a_key)
        chosen.append((d, a))
    return chosen


def detect_refactorings(
    commit_changes: Iterable[MethodMatching],
    class_hierarchy: dict[str, str] | None = None,
    thresholds: Thresholds | None = None,
) -> list[RefactoringEvent]:
    """Find refactoring events among one commit's per-file matchings.

    ``class_hierarchy`` maps a qualified class name to the simple name of
    its superclass and decides between Move, Pull Up and Push Down.
    """
    th = thresholds or Thresholds()
    hierarchy = class_hierarchy or {}
    matchings = list(commit_changes)

    deleted = {d.identity.canonical: _Bag(d) for m in matchings for d in m.unmatched_before}
    added = {a.identity.canonical: _Bag(a) for m in matchings for a in m.unmatched_after}
    modified = sorted(
        ((b, a) for m in matchings for b, a in m.modified_pairs),
        key=lambda p: p[1].identity.canonical,
    )
    events: list[RefactoringEvent] = []

    def consume(pairs, kind_of):
        for d, a in pairs:
            del deleted[d.decl.identity.canonical]
            del added[a.decl.identity.canonical]
            events.append(RefactoringEvent(kind_of(d.decl, a.decl), d.decl.identity, a.decl.identity))

    # 1. same signature, different class or file
    by_signature: dict[tuple[str, tuple[str, ...]], list[tuple[str, _Bag]]] = {}
    for key, a in added.items():
        by_signature.setdefault((a.decl.name, a.decl.param_types), []).append((key, a))
    candidates = []
    for d_key, d in deleted.items():
        for a_key, a in by_signature.get((d.decl.name, d.decl.param_types), []):
            if d.decl.identity == a.decl.identity:
                continue
            if d.decl.enclosing_class == a.decl.enclosing_class and d.decl.file_path == a.decl.file_path:
                continue
            score = _dice_counts(d.counts, d.size, a.counts, a.size)
            if score >= th.move:
                candidates.append((score, a_key, d_key, d, a))
    consume(_greedy(candidates), lambda src, dst: _move_kind(src, dst, hierarchy))

    # 2. same class, similar body
    by_class: dict[str, list[tuple[str, _Bag]]] = {}
    for key, a in added.items():
        by_class.setdefault(a.decl.enclosing_class, []).append((key, a))
    candidates = []
    for d_key, d in deleted.items():
        for a_key, a in by_class.get(d.decl.enclosing_class, []):
            if d.size == 0 and a.size == 0:
                continue
            if not _could_reach(d, a, th.rename):
                continue
            score = _dice_counts(d.counts, d.size, a.counts, a.size)
            if score >= th.rename:
                candidates.append((score, a_key, d_key, d, a))
    consume(_greedy(candidates), lambda src, dst: RefactoringKind.RENAME_METHOD)

    removed = [(m_after, Counter(m_before.body_tokens) - Counter(m_after.body_tokens)) for m_before, m_after in modified]
    gained = [(m_after, Counter(m_after.body_tokens) - Counter(m_before.body_tokens)) for m_before, m_after in modified]

    # 3. extract: the new method's tokens were taken out of a modified one
    for a_key in sorted(added):
        a = added[a_key]
        best = None
        for host, pool in removed:
            score = containment(a.counts, a.size, pool)
            if score >= th.containment and (best is None or score > best[0]):
                best = (score, host)
        if best is None:
            continue
        host = best[1]
        kind = (
            RefactoringKind.EXTRACT_METHOD
            if host.enclosing_class == a.decl.enclosing_class
            else RefactoringKind.EXTRACT_AND_MOVE
        )
        del added[a_key]
        events.append(RefactoringEvent(kind, None, a.decl.identity, host.identity))

    # 4. inline: a deleted method's tokens reappear in a modified one
    for d_key in sorted(deleted):
        d = deleted[d_key]
        best = None
        for host, pool in gained:
            score = containment(d.counts, d.size, pool)
            if score >= th.containment and (best is None or score > best[0]):
                best = (score, host)
        if best is None:
            continue
        host = best[1]
        del deleted[d_key]
        events.append(
            RefactoringEvent(RefactoringKind.INLINE_METHOD, d.decl.identity, host.identity, host.identity)
        )

    # 5. renamed and moved at once
    candidates = []
    for d_key, d in deleted.items():
        for a_key, a in added.items():
            if d.decl.enclosing_class == a.decl.enclosing_class or (d.size == 0 and a.size == 0):
                continue
            if not _could_reach(d, a, th.rename_and_move):
                continue
            score = _dice_counts(d.counts, d.size, a.counts, a.size)
            if score >= th.rename_and_move:
                candidates.append((score, a_key, d_key, d, a))
    consume(_greedy(candidates), lambda src, dst: RefactoringKind.MOVE_METHOD)

    return events


def apply_refactorings(model, events: Iterable[RefactoringEvent], day: str, count_renames: bool = True):
    """Update ``model`` for one commit's events and return it.

    ``model`` is anything with ``upsert_stats``, ``rekey_stats`` and
    ``delete_stats``: a :class:`~churnscope.model.ChangeModel` or a
    :class:`~churnscope.store.StatsStore`. Events naming a method the model
    has never seen simply start fresh statistics.
    """
    for event in events:
        if event.kind in EXTRACT_KINDS:
            model.upsert_stats(MethodStats.single(event.after, day))
        elif event.kind is RefactoringKind.INLINE_METHOD:
            model.delete_stats(event.before)
            model.upsert_stats(MethodStats.single(event.host, day))
        else:
            model.rekey_stats(event.before, event.after)
            if count_renames:
                model.upsert_stats(MethodStats.single(event.after, day))
    return model
