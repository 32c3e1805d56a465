"""Scripted Java repositories with known ground truth.

Used by the test suite and the demo scripts. Everything here is driven by a
seeded :class:`random.Random`, so a seed fully determines a repository,
its method-level history and the refactorings it contains.

The Java model (:class:`JClass`, :class:`JMethod`) is independent of the
parser: rendering records the line span of every method, and method
identities are computed from the model directly. That makes the model a
usable oracle for parsing, counting and refactoring detection.
"""

from __future__ import annotations

import copy
import random
import re
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

AUTHOR = "Synthetic Author <author@example.com>"
BASE_TIME = 1_709_251_200  # 2024-03-01T00:00:00Z

_VERBS = """compute load store parse render check update apply build merge split
collect resolve validate convert format fetch flush reset encode decode scan
index publish notify schedule compile measure filter reduce sort""".split()
_NOUNS = """order invoice payment customer account ledger report config cache
session token buffer record entry index queue batch metric schema module
channel bucket cursor vector matrix profile bundle ticket widget stream""".split()
_ROLES = "Service Manager Helper Repository Controller Processor Builder Registry Adapter Handler".split()
_WORDS = """alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima
mike november oscar papa quebec romeo sierra tango uniform victor whiskey xray
yankee zulu amber basil cedar dune ember fjord glade heron iris jasper""".split()
_TYPES = ["int", "long", "String", "boolean", "double", "List<String>", "Map<String, Integer>"]


# ---------------------------------------------------------------------------
# Java model
# ---------------------------------------------------------------------------


@dataclass
class JMethod:
    name: str
    params: list[tuple[str, str]]
    body: list[str]
    returns: str = "void"
    modifiers: str = "public"
    style: int = 0

    @property
    def erased_params(self) -> tuple[str, ...]:
        return tuple(erase(t) for t, _ in self.params)

    def signature_text(self) -> str:
        params = ", ".join(f"{t} {n}" for t, n in self.params)
        mods = f"{self.modifiers} " if self.modifiers else ""
        return f"{mods}{self.returns} {self.name}({params})"


def erase(type_text: str) -> str:
    depth = 0
    out = []
    for ch in type_text:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    base = "".join(out).strip()
    return base.rsplit(".", 1)[-1].replace(" ", "")


@dataclass
class JClass:
    package: str
    name: str
    methods: list[JMethod] = field(default_factory=list)
    superclass: str | None = None
    fields: list[str] = field(default_factory=list)
    directory: str = "src"

    @property
    def qualified(self) -> str:
        return f"{self.package}.{self.name}" if self.package else self.name

    @property
    def path(self) -> str:
        parts = [self.directory] + (self.package.split(".") if self.package else []) + [f"{self.name}.java"]
        return "/".join(p for p in parts if p)

    def method(self, name: str) -> JMethod:
        return next(m for m in self.methods if m.name == name)

    def identity(self, m: JMethod) -> str:
        return f"{self.path}::{self.qualified}#{m.name}({','.join(m.erased_params)})"

    def render_with_spans(self) -> tuple[str, dict[str, tuple[int, int]]]:
        lines: list[str] = []
        spans: dict[str, tuple[int, int]] = {}
        if self.package:
            lines += [f"package {self.package};", ""]
        lines += ["import java.util.*;", ""]
        ext = f" extends {self.superclass}" if self.superclass else ""
        lines.append(f"public class {self.name}{ext} {{")
        for f in self.fields:
            lines.append(f"    {f}")
        for m in self.methods:
            lines.append("")
            start = len(lines) + 1
            if m.style == 0:
                lines.append(f"    {m.signature_text()} {{")
                lines += [f"        {s}" for s in m.body]
            else:
                lines.append(f"    {m.signature_text()}")
                lines.append("    {")
                lines += [f"            {s}" for s in m.body]
            lines.append("    }")
            spans[self.identity(m)] = (start, len(lines))
        lines.append("}")
        return "\n".join(lines) + "\n", spans

    def render(self) -> str:
        return self.render_with_spans()[0]


# ---------------------------------------------------------------------------
# random Java content
# ---------------------------------------------------------------------------


class CodeFactory:
    """Random but plausible identifiers, statements and methods."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self._used_methods: set[str] = set()
        self._used_classes: set[str] = set()

    def var(self) -> str:
        r = self.rng
        return r.choice(_NOUNS) + r.choice(["", "Count", "Total", "Value", "Id", "Size"]) + str(r.randrange(100))

    def func(self) -> str:
        r = self.rng
        return r.choice(_VERBS) + r.choice(_NOUNS).capitalize() + str(r.randrange(50))

    def word(self) -> str:
        return self.rng.choice(_WORDS)

    def statement(self) -> str:
        r = self.rng
        v, a, b, f = self.var(), self.var(), self.var(), self.func()
        n, n2 = r.randrange(1000), r.randrange(1, 97)
        templates = [
            f"int {v} = {f}({a}, {n});",
            f"{v} = {a} + {b} * {n};",
            f"if ({a} > {n}) {{ {f}({b}); }}",
            f'String {v} = "{self.word()} {self.word()} {n}";',
            f'{a}.{f}({b}, "{self.word()}");',
            f"for (int i = 0; i < {n}; i++) {{ {v} += i * {n2}; }}",
            f"long {v} = {a}.{f}() * {n};",
            f"{a}.add({b});",
            f"while ({v} < {n}) {{ {v} += {n2}; }}",
            f"{f}({a}, {b}, {n});",
            f'log.debug("{self.word()} {{}}", {a});',
            f"double {v} = Math.max({a}, {n}.{n2});",
        ]
        return r.choice(templates)

    def body(self, lo: int = 4, hi: int = 8) -> list[str]:
        return [self.statement() for _ in range(self.rng.randint(lo, hi))]

    def method_name(self) -> str:
        r = self.rng
        for _ in range(1000):
            name = r.choice(_VERBS) + r.choice(_NOUNS).capitalize()
            if r.random() < 0.3:
                name += r.choice(["Async", "Safely", "All", "Once", "Internal"])
            if name not in self._used_methods:
                self._used_methods.add(name)
                return name
        name = f"{r.choice(_VERBS)}{len(self._used_methods)}"
        self._used_methods.add(name)
        return name

    def class_name(self) -> str:
        r = self.rng
        for _ in range(1000):
            name = r.choice(_NOUNS).capitalize() + r.choice(_ROLES)
            if name not in self._used_classes:
                self._used_classes.add(name)
                return name
        name = f"Generated{len(self._used_classes)}"
        self._used_classes.add(name)
        return name

    def params(self) -> list[tuple[str, str]]:
        r = self.rng
        names = r.sample(["a", "b", "c", "key", "value", "limit", "name", "items"], r.randint(0, 3))
        return [(r.choice(_TYPES), n) for n in names]

    def method(self, lo: int = 4, hi: int = 8) -> JMethod:
        r = self.rng
        return JMethod(
            name=self.method_name(),
            params=self.params(),
            body=self.body(lo, hi),
            modifiers=r.choice(["public", "private", "protected", "public static", ""]),
        )

    def klass(self, package: str, n_methods: int | None = None, superclass: str | None = None) -> JClass:
        n = self.rng.randint(2, 5) if n_methods is None else n_methods
        return JClass(
            package=package,
            name=self.class_name(),
            methods=[self.method() for _ in range(n)],
            superclass=superclass,
            fields=[f"private int {self.var()};"],
        )

    def edit(self, m: JMethod) -> str:
        """Change ``m`` so that its tokens differ; returns the edit kind."""
        r = self.rng
        choice = r.random()
        if choice < 0.35:
            k = r.randrange(len(m.body))
            old = m.body[k]
            while m.body[k] == old:
                m.body[k] = self.statement()
            return "replace"
        if choice < 0.65:
            m.body.insert(r.randint(0, len(m.body)), self.statement())
            return "insert"
        if choice < 0.8 and len(m.body) > 4:
            del m.body[r.randrange(len(m.body))]
            return "delete"
        if choice < 0.9:
            options = [x for x in ["public", "private", "protected", "public static", ""] if x != m.modifiers]
            m.modifiers = r.choice(options)
            return "signature"
        k = r.randrange(len(m.body))
        m.body[k] = self._bump_literal(m.body[k])
        return "literal"

    def _bump_literal(self, stmt: str) -> str:
        match = re.search(r"\b\d+\b", stmt)
        if match is None:
            return f"{stmt} {self.var()}++;"
        return stmt[: match.start()] + str(int(match.group()) + 1) + stmt[match.end() :]


# ---------------------------------------------------------------------------
# Git repository construction
# ---------------------------------------------------------------------------


class RepoBuilder:
    """Build a Git repository from scripted commits with ``git fast-import``.

    Commits are queued with :meth:`commit` and written by :meth:`build`,
    which may be called repeatedly; marks persist between builds.
    """

    def __init__(self, path: str | Path, branch: str = "master"):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.branch = branch
        self._git("init", "-q", "-b", branch)
        self._marks_file = self.path / ".git" / "synthetic-marks"
        self._chunks: list[bytes] = []
        self._next_mark = 1
        self._tips: dict[str, int] = {}
        self.shas: dict[int, str] = {}
        self.trees: dict[int, dict[str, str]] = {}

    def _git(self, *args: str, data: bytes | None = None) -> bytes:
        proc = subprocess.run(
            ["git", "-C", str(self.path), *args],
            input=data,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            check=False,
        )
        if proc.returncode != 0:
            raise RuntimeError(f"git {args[0]} failed: {proc.stderr.decode(errors='replace')}")
        return proc.stdout

    def commit(
        self,
        changes: dict[str, str | None],
        timestamp: int,
        message: str = "change",
        branch: str | None = None,
        parents: list[int] | None = None,
        author: str = AUTHOR,
    ) -> int:
        """Queue a commit; ``None`` content deletes a path. Returns its mark."""
        branch = branch or self.branch
        mark = self._next_mark
        self._next_mark += 1
        if parents is None:
            parents = [self._tips[branch]] if branch in self._tips else []
        tree = dict(self.trees[parents[0]]) if parents else {}
        out = [f"commit refs/heads/{branch}\nmark :{mark}\n".encode()]
        out.append(f"author {author} {timestamp} +0000\ncommitter {author} {timestamp} +0000\n".encode())
        msg = message.encode()
        out.append(b"data %d\n%s\n" % (len(msg), msg))
        if parents:
            out.append(f"from :{parents[0]}\n".encode())
            for extra in parents[1:]:
                out.append(f"merge :{extra}\n".encode())
        for path, content in sorted(changes.items()):
            if content is None:
                out.append(f"D {path}\n".encode())
                tree.pop(path, None)
            else:
                data = content.encode()
                out.append(f"M 100644 inline {path}\n".encode())
                out.append(b"data %d\n%s\n" % (len(data), data))
                tree[path] = content
        self._chunks.append(b"".join(out))
        self._tips[branch] = mark
        self.trees[mark] = tree
        return mark

    def build(self, checkout: bool = True) -> None:
        if self._chunks:
            stream = b"".join(self._chunks) + b"done\n"
            self._git(
                "fast-import", "--quiet", "--done", "--date-format=raw",
                f"--export-marks={self._marks_file}",
                f"--import-marks-if-exists={self._marks_file}",
                data=stream,
            )
            self._chunks = []
            for line in self._marks_file.read_text().splitlines():
                mark, sha = line.split()
                self.shas[int(mark[1:])] = sha
        if checkout:
            self._git("reset", "-q", "--hard")

    def set_head(self, mark: int, branch: str | None = None) -> None:
        """Point ``branch`` at an already built commit and check it out."""
        self._git("update-ref", f"refs/heads/{branch or self.branch}", self.shas[mark])
        self._git("reset", "-q", "--hard")


# ---------------------------------------------------------------------------
# histories
# ---------------------------------------------------------------------------


@dataclass
class TruthEvent:
    kind: str
    before: str | None
    after: str
    host: str | None = None

    def key(self) -> tuple[str, str | None, str, str | None]:
        return (self.kind, self.before, self.after, self.host)


@dataclass
class ScriptedCommit:
    timestamp: int
    message: str
    before: dict[str, JClass]
    after: dict[str, JClass]
    events: list[TruthEvent] = field(default_factory=list)

    def file_changes(self) -> dict[str, str | None]:
        old = files_of(self.before)
        new = files_of(self.after)
        changes: dict[str, str | None] = {p: t for p, t in new.items() if old.get(p) != t}
        changes.update({p: None for p in old if p not in new})
        return changes


def files_of(classes: dict[str, JClass]) -> dict[str, str]:
    return {c.path: c.render() for c in classes.values()}


PLAIN_OPS = ("edit", "edit", "edit", "edit", "add_method", "delete_method", "reformat", "add_class", "delete_class")
REFACTOR_OPS = (
    "rename", "move", "pull_up", "push_down", "extract", "extract_move", "inline",
)


class HistoryGenerator:
    """Random commit sequences over a small set of Java classes.

    With ``refactorings=False`` the history contains only edits, additions,
    deletions and whitespace-only reformatting, and method names are never
    reused. That keeps the refactoring detector silent and makes simple
    per-method diffing of the model an exact oracle for change counts.
    """

    def __init__(self, seed: int, refactorings: bool = False, start_time: int = BASE_TIME, step: int = 5400):
        self.rng = random.Random(seed)
        self.code = CodeFactory(self.rng)
        self.refactorings = refactorings
        self.time = start_time
        self.step = step
        self.classes: dict[str, JClass] = {}
        self.packages = ["com.acme.core", "com.acme.util", "org.sample.app"]

    def initial(self, n_classes: int = 4) -> ScriptedCommit:
        before = copy.deepcopy(self.classes)
        base = self.code.klass(self.rng.choice(self.packages), n_methods=4)
        self.classes[base.qualified] = base
        sub = self.code.klass(base.package, n_methods=3, superclass=base.name)
        self.classes[sub.qualified] = sub
        for _ in range(max(0, n_classes - 2)):
            c = self.code.klass(self.rng.choice(self.packages))
            self.classes[c.qualified] = c
        return self._commit(before, "initial import", [])

    def _commit(self, before, message, events) -> ScriptedCommit:
        self.time += self.rng.randint(self.step // 2, self.step * 3 // 2)
        return ScriptedCommit(self.time, message, before, copy.deepcopy(self.classes), events)

    def _pick_class(self, min_methods: int = 1) -> JClass | None:
        options = [c for c in self.classes.values() if len(c.methods) >= min_methods]
        return self.rng.choice(sorted(options, key=lambda c: c.qualified)) if options else None

    def next(self) -> ScriptedCommit:
        before = copy.deepcopy(self.classes)
        ops = list(PLAIN_OPS) + (list(REFACTOR_OPS) * 2 if self.refactorings else [])
        messages, events = [], []
        touched: set[str] = set()
        for _ in range(self.rng.randint(1, 3)):
            op = self.rng.choice(ops)
            result = getattr(self, f"_op_{op}")(touched)
            if result is not None:
                messages.append(op)
                events.extend(result)
        if not messages:
            c = self._pick_class()
            if c is None:
                self._op_add_class(touched)
                messages.append("add_class")
            else:
                self.code.edit(self.rng.choice(c.methods))
                messages.append("edit")
        return self._commit(before, ", ".join(messages), events)

    # plain operations; each returns [] on success or None when not applicable

    def _op_edit(self, touched):
        c = self._pick_class()
        if c is None:
            return None
        m = self.rng.choice(c.methods)
        if m.name in touched:
            return None
        self.code.edit(m)
        touched.add(m.name)
        return []

    def _op_reformat(self, touched):
        c = self._pick_class()
        if c is None:
            return None
        m = self.rng.choice(c.methods)
        m.style = 1 - m.style
        return []

    def _op_add_method(self, touched):
        c = self._pick_class(0)
        if c is None:
            return None
        m = self.code.method()
        c.methods.insert(self.rng.randint(0, len(c.methods)), m)
        touched.add(m.name)
        return []

    def _op_delete_method(self, touched):
        c = self._pick_class(2)
        if c is None:
            return None
        candidates = [m for m in c.methods if m.name not in touched]
        if not candidates:
            return None
        c.methods.remove(self.rng.choice(candidates))
        return []

    def _op_add_class(self, touched):
        c = self.code.klass(self.rng.choice(self.packages))
        self.classes[c.qualified] = c
        touched.update(m.name for m in c.methods)
        return []

    def _op_delete_class(self, touched):
        if len(self.classes) <= 3:
            return None
        c = self._pick_class(0)
        if c is None or any(m.name in touched for m in c.methods):
            return None
        if any(o.superclass == c.name for o in self.classes.values()):
            return None
        del self.classes[c.qualified]
        return []

    # refactorings

    def _lightly_edit(self, m: JMethod) -> None:
        if self.rng.random() < 0.4:
            k = self.rng.randrange(len(m.body))
            m.body[k] = self.code.statement()

    def _op_rename(self, touched):
        c = self._pick_class()
        m = self.rng.choice(c.methods) if c else None
        if m is None or m.name in touched or len(m.body) < 4:
            return None
        before_id = c.identity(m)
        m.name = self.code.method_name()
        self._lightly_edit(m)
        touched.add(m.name)
        return [TruthEvent("RenameMethod", before_id, c.identity(m))]

    def _move(self, src: JClass, dst: JClass, kind: str, touched):
        candidates = [m for m in src.methods if m.name not in touched and len(m.body) >= 4]
        if not candidates or src.qualified == dst.qualified:
            return None
        m = self.rng.choice(candidates)
        if any(o.name == m.name and o.erased_params == m.erased_params for o in dst.methods):
            return None
        before_id = src.identity(m)
        src.methods.remove(m)
        self._lightly_edit(m)
        dst.methods.insert(self.rng.randint(0, len(dst.methods)), m)
        touched.add(m.name)
        return [TruthEvent(kind, before_id, dst.identity(m))]

    def _related(self, src: JClass, dst: JClass) -> bool:
        return src.superclass == dst.name or dst.superclass == src.name

    def _op_move(self, touched):
        pairs = [
            (a, b)
            for a in self.classes.values()
            for b in self.classes.values()
            if a.qualified != b.qualified and a.methods and not self._related(a, b)
        ]
        if not pairs:
            return None
        src, dst = self.rng.choice(sorted(pairs, key=lambda p: (p[0].qualified, p[1].qualified)))
        return self._move(src, dst, "MoveMethod", touched)

    def _hierarchy_pairs(self):
        by_name = {c.name: c for c in self.classes.values()}
        return sorted(
            ((c, by_name[c.superclass]) for c in self.classes.values() if c.superclass in by_name),
            key=lambda p: p[0].qualified,
        )

    def _op_pull_up(self, touched):
        pairs = self._hierarchy_pairs()
        if not pairs:
            return None
        sub, sup = self.rng.choice(pairs)
        return self._move(sub, sup, "PullUpMethod", touched)

    def _op_push_down(self, touched):
        pairs = self._hierarchy_pairs()
        if not pairs:
            return None
        sub, sup = self.rng.choice(pairs)
        return self._move(sup, sub, "PushDownMethod", touched)

    def _extract(self, touched, other_class: bool):
        c = self._pick_class()
        if c is None:
            return None
        hosts = [m for m in c.methods if m.name not in touched and len(m.body) >= 5]
        if not hosts:
            return None
        host = self.rng.choice(hosts)
        k = self.rng.randint(3, min(5, len(host.body) - 2))
        at = self.rng.randint(0, len(host.body) - k)
        moved = host.body[at : at + k]
        new = JMethod(self.code.method_name(), [], list(moved), modifiers="private")
        target = c
        if other_class:
            others = [o for o in self.classes.values() if o.qualified != c.qualified]
            if not others:
                return None
            target = self.rng.choice(sorted(others, key=lambda o: o.qualified))
            new.modifiers = "public static"
            call = f"{target.name}.{new.name}();"
        else:
            call = f"{new.name}();"
        host.body[at : at + k] = [call]
        target.methods.insert(self.rng.randint(0, len(target.methods)), new)
        touched.update({host.name, new.name})
        kind = "ExtractAndMove" if other_class else "ExtractMethod"
        return [TruthEvent(kind, None, target.identity(new), c.identity(host))]

    def _op_extract(self, touched):
        return self._extract(touched, other_class=False)

    def _op_extract_move(self, touched):
        return self._extract(touched, other_class=True)

    def _op_inline(self, touched):
        c = self._pick_class(2)
        if c is None:
            return None
        free = [m for m in c.methods if m.name not in touched]
        if len(free) < 2:
            return None
        victim, host = self.rng.sample(free, 2)
        if len(victim.body) > 6:
            return None
        at = self.rng.randint(0, len(host.body))
        host.body[at:at] = list(victim.body)
        c.methods.remove(victim)
        touched.update({victim.name, host.name})
        return [TruthEvent("InlineMethod", c.identity(victim), c.identity(host), c.identity(host))]


def build_history(path: str | Path, commits: list[ScriptedCommit], build: bool = True) -> tuple[RepoBuilder, list[int]]:
    """Write scripted commits to a new repository; returns builder and marks."""
    builder = RepoBuilder(path)
    marks = [builder.commit(c.file_changes(), c.timestamp, c.message) for c in commits]
    if build:
        builder.build()
    return builder, marks


def random_history(seed: int, n_commits: int, refactorings: bool = False, n_classes: int = 4) -> list[ScriptedCommit]:
    gen = HistoryGenerator(seed, refactorings=refactorings)
    commits = [gen.initial(n_classes)]
    while len(commits) < n_commits:
        commits.append(gen.next())
    return commits


# ---------------------------------------------------------------------------
# refactoring scenarios for detector evaluation
# ---------------------------------------------------------------------------


def refactoring_scenario(seed: int, kinds: list[str], noise_edits: int = 1) -> ScriptedCommit:
    """One commit applying the given refactoring operations plus noise edits.

    ``kinds`` are operation names from :data:`REFACTOR_OPS`. Operations that
    cannot apply to the random starting code are skipped, so the returned
    events are the ground truth actually present in the commit.
    """
    gen = HistoryGenerator(seed, refactorings=True)
    gen.initial(n_classes=4)
    before = copy.deepcopy(gen.classes)
    touched: set[str] = set()
    events: list[TruthEvent] = []
    for op in kinds:
        result = getattr(gen, f"_op_{op}")(touched)
        if result:
            events.extend(result)
    for _ in range(noise_edits):
        gen._op_edit(touched)
    return ScriptedCommit(gen.time + 60, ", ".join(kinds), before, copy.deepcopy(gen.classes), events)


def scratch_dir(prefix: str = "churnscope-") -> Path:
    return Path(tempfile.mkdtemp(prefix=prefix))
