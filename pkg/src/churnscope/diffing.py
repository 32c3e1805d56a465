"""Exact matching of method declarations between two revisions of a file."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from churnscope.parsing import MethodDecl, MethodIdentity


class ChangeKind(str, enum.Enum):
    UNCHANGED = "Unchanged"
    MODIFIED = "Modified"
    ADDED = "Added"
    DELETED = "Deleted"


@dataclass
class MethodMatching:
    matched_pairs: list[tuple[MethodDecl, MethodDecl]] = field(default_factory=list)
    unmatched_before: list[MethodDecl] = field(default_factory=list)
    unmatched_after: list[MethodDecl] = field(default_factory=list)

    @property
    def modified_pairs(self) -> list[tuple[MethodDecl, MethodDecl]]:
        return [(b, a) for b, a in self.matched_pairs if is_modified(b, a)]


def _key(decl: MethodDecl) -> tuple[str, tuple[str, ...]]:
    return decl.qualified_name, decl.param_types


def is_modified(before: MethodDecl, after: MethodDecl) -> bool:
    # signature edits (visibility, return type, throws) count as a change too
    return (
        before.body_tokens != after.body_tokens
        or before.signature_tokens != after.signature_tokens
    )


def match_methods(before: list[MethodDecl], after: list[MethodDecl]) -> MethodMatching:
    """Pair declarations with identical qualified name and parameter types."""
    after_by_key = {_key(d): d for d in after}
    matching = MethodMatching()
    used: set[tuple[str, tuple[str, ...]]] = set()
    for b in before:
        a = after_by_key.get(_key(b))
        if a is not None and _key(b) not in used:
            matching.matched_pairs.append((b, a))
            used.add(_key(b))
        else:
            matching.unmatched_before.append(b)
    matching.unmatched_after = [a for a in after if _key(a) not in used]
    return matching


def classify_changes(matching: MethodMatching) -> list[tuple[MethodIdentity, ChangeKind]]:
    """Label every method of a matching.

    Matched pairs report the identity of the ``after`` side, which differs
    from the ``before`` side only when the file itself was renamed.
    """
    result = []
    for b, a in matching.matched_pairs:
        kind = ChangeKind.MODIFIED if is_modified(b, a) else ChangeKind.UNCHANGED
        result.append((a.identity, kind))
    result.extend((d.identity, ChangeKind.DELETED) for d in matching.unmatched_before)
    result.extend((d.identity, ChangeKind.ADDED) for d in matching.unmatched_after)
    return result
