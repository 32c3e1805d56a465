from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from churnscope.parsing import _TOKEN_RE
from churnscope.synthetic import RepoBuilder

CORPUS = Path(__file__).parent / "corpus"


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.java"))


def corpus_expected() -> dict:
    return json.loads((CORPUS / "expected.json").read_text())


def java_class(name: str, body: str, package: str = "p", extends: str | None = None) -> str:
    ext = f" extends {extends}" if extends else ""
    head = f"package {package};\n\n" if package else ""
    return f"{head}public class {name}{ext} {{\n{body}}}\n"


def java_method(name: str, statements: list[str], params: str = "", returns: str = "void") -> str:
    lines = [f"    public {returns} {name}({params}) {{"]
    lines += [f"        {s}" for s in statements]
    lines.append("    }")
    return "\n".join(lines) + "\n"


DAY = 86400


def _comment_spans(source: str) -> list[tuple[int, int]]:
    return [
        m.span()
        for m in _TOKEN_RE.finditer(source)
        if m.lastgroup in {"comment", "string", "char", "textblock"}
    ]


def inject_comments(source: str, rng: random.Random) -> str:
    """Insert comments and change indentation without touching any token."""
    spans = _comment_spans(source)

    def inside(offset: int) -> bool:
        return any(a < offset < b for a, b in spans)

    out = []
    offset = 0
    for line in source.split("\n"):
        safe = not inside(offset)
        stripped = line.lstrip(" ")
        indent = " " * rng.randint(0, 8) if stripped else ""
        choice = rng.random()
        if safe and choice < 0.15:
            out.append(indent + "// injected { comment }")
        elif safe and choice < 0.25:
            out.append(indent + "/* block\n   ( spanning */")
        out.append(indent + stripped if safe and rng.random() < 0.5 else line)
        end = offset + len(line)
        if not inside(end) and "//" not in line and stripped.endswith((";", "{", "}")) and rng.random() < 0.2:
            out[-1] += "   /* trailing } */"
        offset = end + 1
    return "\n".join(out)


def reflow_whitespace(source: str, rng: random.Random) -> str:
    """Vary the whitespace between tokens, leaving literals and comments alone."""
    out = []
    last = 0
    after_line_comment = False
    for m in _TOKEN_RE.finditer(source):
        if m.lastgroup == "ws":
            out.append(source[last : m.start()])
            gap = rng.choice([" ", "  ", "\t", "\n", "\n\t  ", " \n"])
            if after_line_comment and "\n" not in gap:
                gap += "\n"
            out.append(gap)
            last = m.end()
        after_line_comment = m.lastgroup == "comment" and m.group().startswith("//")
    out.append(source[last:])
    return "".join(out)


@pytest.fixture
def repo_builder(tmp_path):
    return RepoBuilder(tmp_path / "repo")


# -- acceptance reporting ------------------------------------------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "results": []})
    entry["results"].append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        ok = all(passed for _, passed in entry["results"])
        detail = ", ".join(f"{name}={'pass' if passed else 'FAIL'}" for name, passed in entry["results"])
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {entry['title']}  ({detail})")
