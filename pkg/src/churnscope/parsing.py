"""Error-tolerant extraction of Java method declarations from source text.

The parser does not build a full syntax tree. It lexes the file, pairs up
braces, and walks class bodies member by member, which is enough to find
every method and constructor with its qualified name, erased parameter
types, line span and normalized body tokens. A syntax error inside one
method body leaves its siblings intact as long as braces still balance.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import lru_cache

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
    |(?P<comment>//[^\n]*|/\*.*?(?:\*/|\Z))
    |(?P<textblock>\"\"\".*?\"\"\")
    |(?P<string>"(?:\\.|[^"\\\n])*")
    |(?P<char>'(?:\\.|[^'\\\n])+')
    |(?P<ident>(?:[^\W\d]|\$)[\w$]*)
    |(?P<number>
        0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?\d+)?[lLfFdD]?
       |0[bB][01_]+[lL]?
       |(?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d+)?[lLfFdD]?)
    |(?P<op>>>>=|<<=|>>=|>>>|\.\.\.|->|::|\+\+|--|&&|\|\||[-+*/%&|^!=<>]=|<<|>>
       |[-+*/%&|^!=<>~?:;,.(){}\[\]@])
    |(?P<other>.)
    """,
    re.S | re.X,
)

_IDENT_RE = re.compile(r"(?:[^\W\d]|\$)[\w$]*\Z")

_TYPE_KEYWORDS = frozenset({"class", "interface", "enum", "record"})

_RESERVED = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized this
    throw throws transient try void volatile while true false null""".split()
)


@dataclass(frozen=True)
class MethodIdentity:
    """Stable key under which a method's statistics accumulate."""

    file_path: str
    qualified_name: str
    param_types: tuple[str, ...] = ()

    @property
    def canonical(self) -> str:
        return f"{self.file_path}::{self.qualified_name}({','.join(self.param_types)})"

    @property
    def class_name(self) -> str:
        return self.qualified_name.partition("#")[0]

    @property
    def method_name(self) -> str:
        return self.qualified_name.partition("#")[2]

    @classmethod
    def parse(cls, text: str) -> MethodIdentity:
        """Inverse of :attr:`canonical`."""
        path, sep, rest = text.rpartition("::")
        if not sep or not rest.endswith(")") or "(" not in rest:
            raise ValueError(f"not a canonical method identity: {text!r}")
        name, _, params = rest[:-1].partition("(")
        types = tuple(params.split(",")) if params else ()
        return cls(path, name, types)

    def __str__(self) -> str:
        return self.canonical

    def __lt__(self, other: MethodIdentity) -> bool:
        return self.canonical < other.canonical


@dataclass(frozen=True)
class MethodDecl:
    qualified_name: str
    param_types: tuple[str, ...]
    file_path: str
    start_line: int
    end_line: int
    body_tokens: tuple[str, ...]
    enclosing_class: str
    superclass: str | None = None
    signature_tokens: tuple[str, ...] = ()

    @property
    def identity(self) -> MethodIdentity:
        return MethodIdentity(self.file_path, self.qualified_name, self.param_types)

    @property
    def name(self) -> str:
        return self.qualified_name.partition("#")[2]


class ParseResult(list):
    """Methods of one file in source order.

    ``degraded`` is set when the file could not be parsed at all (for
    instance unbalanced braces); the list is then empty. ``hierarchy`` maps
    each declared class to the simple name of its ``extends`` target.
    """

    def __init__(self, methods=(), degraded: bool = False, hierarchy: dict[str, str] | None = None):
        super().__init__(methods)
        self.degraded = degraded
        self.hierarchy = hierarchy or {}


def _lex(source: str) -> tuple[list[str], list[int]]:
    texts: list[str] = []
    lines: list[int] = []
    line = 1
    for m in _TOKEN_RE.finditer(source):
        kind = m.lastgroup
        text = m.group()
        if kind == "ws" or kind == "comment":
            line += text.count("\n")
            continue
        texts.append(text)
        lines.append(line)
        if kind == "textblock":
            line += text.count("\n")
    return texts, lines


def normalize_tokens(body: str) -> list[str]:
    """Lex Java text into tokens, dropping comments and whitespace.

    >>> normalize_tokens('return 1; // done')
    ['return', '1', ';']
    """
    return _lex(body)[0]


def _erase_type(tokens: list[str]) -> str:
    depth = 0
    simple = ""
    dims = 0
    for t in tokens:
        if t.startswith("<"):
            depth += t.count("<")
            continue
        if t.startswith(">"):
            depth -= t.count(">")
            continue
        if depth > 0:
            continue
        if t == "[":
            dims += 1
        elif t == "...":
            dims += 1
        elif t not in {".", "]", "final", "?", "&"} and _IDENT_RE.match(t):
            simple = t
    return simple + "[]" * dims if simple else "".join(tokens)


def _param_types(tokens: list[str]) -> tuple[str, ...]:
    params: list[list[str]] = []
    current: list[str] = []
    angle = paren = 0
    for t in tokens:
        if t.startswith("<") and t in {"<", "<<"}:
            angle += len(t)
        elif t in {">", ">>", ">>>"}:
            angle -= len(t)
        elif t == "(":
            paren += 1
        elif t == ")":
            paren -= 1
        if t == "," and angle <= 0 and paren <= 0:
            params.append(current)
            current = []
            continue
        current.append(t)
    if current:
        params.append(current)

    types: list[str] = []
    for p in params:
        p = [t for t in p if t != "final"]
        if not p:
            continue
        # the declared name is the last identifier, possibly followed by C-style dims
        k = len(p) - 1
        trailing_dims = 0
        while k > 0 and p[k] in {"[", "]"}:
            trailing_dims += p[k] == "["
            k -= 1
        name = p[k]
        if name == "this":
            continue
        type_tokens = p[:k] if k > 0 else p
        types.append(_erase_type(type_tokens) + "[]" * trailing_dims)
    return tuple(types)


class _Parser:
    def __init__(self, source: str, file_path: str):
        self.texts, self.lines = _lex(source)
        self.file_path = file_path
        self.package = ""
        self.methods: list[MethodDecl] = []
        self.hierarchy: dict[str, str] = {}
        self.match: dict[int, int] = {}
        self.record_components: dict[str, list[str]] = {}

    def pair_braces(self) -> bool:
        stack: list[int] = []
        for i, t in enumerate(self.texts):
            if t == "{":
                stack.append(i)
            elif t == "}":
                if not stack:
                    return False
                self.match[stack.pop()] = i
        return not stack

    def skip_annotation(self, j: int, end: int) -> int:
        texts = self.texts
        j += 1
        if j < end and _IDENT_RE.match(texts[j]):
            j += 1
            while j + 1 < end and texts[j] == "." and _IDENT_RE.match(texts[j + 1]):
                j += 2
        if j < end and texts[j] == "(":
            depth = 0
            while j < end:
                if texts[j] == "(":
                    depth += 1
                elif texts[j] == ")":
                    depth -= 1
                    if depth == 0:
                        return j + 1
                elif texts[j] == "{":
                    j = self.match.get(j, j)
                j += 1
        return j

    def skip_enum_constants(self, i: int, end: int) -> int:
        texts = self.texts
        while i < end:
            t = texts[i]
            if t == "{":
                i = self.match[i] + 1
                continue
            if t == ";":
                return i + 1
            i += 1
        return end

    def skip_to_semicolon(self, j: int, end: int) -> int:
        texts = self.texts
        while j < end:
            if texts[j] == "{":
                j = self.match[j] + 1
                continue
            if texts[j] == ";":
                return j + 1
            j += 1
        return end

    def members(self, i: int, end: int, owner: str | None, enum_body: bool = False) -> None:
        texts = self.texts
        if enum_body:
            i = self.skip_enum_constants(i, end)
        while i < end:
            if texts[i] == ";":
                i += 1
                continue
            start = i
            header: list[int] = []
            j = i
            while j < end:
                t = texts[j]
                if t == "@" and not (j + 1 < end and texts[j + 1] == "interface"):
                    j = self.skip_annotation(j, end)
                    continue
                if t in {"{", ";", "}"}:
                    break
                header.append(j)
                j += 1
            if j >= end:
                return
            i = self.member(start, header, j, end, owner)

    def member(self, start: int, header: list[int], j: int, end: int, owner: str | None) -> int:
        texts = self.texts
        term = texts[j]
        words = [texts[k] for k in header]
        if term == "}":
            return j + 1

        for pos, w in enumerate(words[:-1]):
            if (
                w in _TYPE_KEYWORDS
                and (pos == 0 or words[pos - 1] != ".")
                and _IDENT_RE.match(words[pos + 1])
                and words[pos + 1] not in _RESERVED
            ):
                return self.type_decl(words, pos, j, end, owner)

        if owner is None:
            if words[:1] == ["package"] and term == ";":
                self.package = "".join(words[1:])
            return self.match[j] + 1 if term == "{" else j + 1

        paren_pos = next((p for p, w in enumerate(words) if w == "("), None)
        assign_pos = next((p for p, w in enumerate(words) if w == "="), None)
        is_method = paren_pos is not None and paren_pos > 0 and (
            assign_pos is None or assign_pos > paren_pos
        )
        if term == "{":
            if assign_pos is not None and not is_method:
                return self.skip_to_semicolon(j, end)
            if not is_method:
                if owner in self.record_components and words and words[-1] == owner.rsplit(".", 1)[-1]:
                    self.add_compact_constructor(start, header, j, owner)
                return self.match[j] + 1
            close = self.match[j]
            self.add_method(start, header, paren_pos, j + 1, close, close, owner)
            return close + 1
        if is_method:
            self.add_method(start, header, paren_pos, None, None, j, owner)
        return j + 1

    def type_decl(self, words: list[str], pos: int, j: int, end: int, owner: str | None) -> int:
        texts = self.texts
        if texts[j] != "{":
            return self.match[j] + 1 if texts[j] == "{" else j + 1
        name = words[pos + 1]
        if owner is not None:
            qualified = f"{owner}.{name}"
        elif self.package:
            qualified = f"{self.package}.{name}"
        else:
            qualified = name
        rest = words[pos + 2 :]
        # "extends" inside type parameters is a bound, not the superclass
        depth = 0
        top_level: list[str] = []
        for w in rest:
            if w.startswith("<"):
                depth += w.count("<")
            elif w.startswith(">"):
                depth -= w.count(">")
            elif depth <= 0:
                top_level.append(w)
        if "extends" in top_level:
            k = top_level.index("extends") + 1
            seg: list[str] = []
            while k < len(top_level) and top_level[k] not in {"implements", ",", "permits"}:
                seg.append(top_level[k])
                k += 1
            idents = [w for w in seg if _IDENT_RE.match(w)]
            if idents:
                self.hierarchy[qualified] = idents[-1]
        if words[pos] == "record" and "(" in rest:
            self.record_components[qualified] = rest[rest.index("(") :]
        close = self.match[j]
        self.members(j + 1, close, qualified, enum_body=words[pos] == "enum")
        return close + 1

    def add_method(
        self,
        start: int,
        header: list[int],
        paren_pos: int,
        body_start: int | None,
        body_end: int | None,
        last: int,
        owner: str,
    ) -> None:
        texts = self.texts
        words = [texts[k] for k in header]
        name = words[paren_pos - 1]
        if not _IDENT_RE.match(name) or name in _RESERVED:
            return
        depth = 0
        close_pos = len(words)
        for p in range(paren_pos, len(words)):
            if words[p] == "(":
                depth += 1
            elif words[p] == ")":
                depth -= 1
                if depth == 0:
                    close_pos = p
                    break
        body = tuple(texts[body_start:body_end]) if body_start is not None else ()
        self.methods.append(
            MethodDecl(
                qualified_name=f"{owner}#{name}",
                param_types=_param_types(words[paren_pos + 1 : close_pos]),
                file_path=self.file_path,
                start_line=self.lines[start],
                end_line=self.lines[last],
                body_tokens=body,
                enclosing_class=owner,
                superclass=self.hierarchy.get(owner),
                signature_tokens=tuple(words),
            )
        )

    def add_compact_constructor(self, start: int, header: list[int], j: int, owner: str) -> None:
        # a record's compact constructor takes the record components
        components = self.record_components[owner]
        depth = 0
        close_pos = len(components)
        for p, w in enumerate(components):
            depth += (w == "(") - (w == ")")
            if depth == 0:
                close_pos = p
                break
        close = self.match[j]
        name = owner.rsplit(".", 1)[-1]
        self.methods.append(
            MethodDecl(
                qualified_name=f"{owner}#{name}",
                param_types=_param_types(components[1:close_pos]),
                file_path=self.file_path,
                start_line=self.lines[start],
                end_line=self.lines[close],
                body_tokens=tuple(self.texts[j + 1 : close]),
                enclosing_class=owner,
                superclass=self.hierarchy.get(owner),
                signature_tokens=tuple(self.texts[k] for k in header),
            )
        )

    def run(self) -> ParseResult:
        if not self.pair_braces():
            return ParseResult(degraded=True)
        self.members(0, len(self.texts), None)
        seen: set[tuple[str, tuple[str, ...]]] = set()
        unique = []
        for m in self.methods:
            key = (m.qualified_name, m.param_types)
            if key in seen:
                continue
            seen.add(key)
            unique.append(m)
        return ParseResult(unique, hierarchy=self.hierarchy)


def extract_methods(source: str, file_path: str) -> ParseResult:
    """Parse ``source`` and return its method and constructor declarations.

    Never raises. Files whose braces do not balance come back empty with
    ``degraded`` set, and the caller is expected to skip them.
    """
    try:
        return _Parser(source, file_path).run()
    except Exception:  # noqa: BLE001 - parsing arbitrary text must not abort a scan
        logger.warning("parser failed on %s", file_path, exc_info=True)
        return ParseResult(degraded=True)


@lru_cache(maxsize=512)
def extract_methods_cached(source: str, file_path: str) -> ParseResult:
    return extract_methods(source, file_path)
