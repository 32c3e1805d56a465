"""Text, JSON and HTML views of the collected statistics."""

from __future__ import annotations

import html
import json
import logging
import re
from datetime import datetime, timezone
from os import PathLike
from pathlib import Path

from churnscope.model import MethodStats, WindowConfig
from churnscope.parsing import MethodIdentity, extract_methods

logger = logging.getLogger(__name__)

BLOCKS = "▁▂▃▄▅▆▇█"

CHART_HEIGHT = 40
BAR_WIDTH = 10


def label(total: int, days: int) -> str:
    return f"{total} changes in last {days} days"


def sparkline(counts: list[int]) -> str:
    """One cell per day, scaled to the largest count; empty days are blank."""
    top = max(counts, default=0)
    cells = []
    for c in counts:
        if c <= 0:
            cells.append(" ")
        else:
            cells.append(BLOCKS[min(len(BLOCKS), -(-c * len(BLOCKS) // top)) - 1])
    return "".join(cells)


def _split_lines(source: str) -> list[str]:
    # line numbers in the parser count "\n" only, so split the same way
    return re.split(r"(?<=\n)", source) if source else []


def _stats_by_key(stats: list[MethodStats], window: WindowConfig):
    return {
        (s.identity.qualified_name, s.identity.param_types): s.restricted(window) for s in stats
    }


def annotate_file(source: str, stats: list[MethodStats], window: WindowConfig, file_path: str = "") -> str:
    """Insert a change label above each method that changed in the window."""
    methods = extract_methods(source, file_path)
    if methods.degraded:
        logger.warning("%s does not parse; emitting it unannotated", file_path or "source")
        return source
    by_key = _stats_by_key(stats, window)
    inserts: dict[int, list[str]] = {}
    for m in methods:
        s = by_key.get((m.qualified_name, m.param_types))
        if s is None or s.total_changes == 0:
            continue
        inserts.setdefault(m.start_line, []).append(annotation_line(s, window))
    if not inserts:
        return source
    lines = _split_lines(source)
    out = []
    for number, line in enumerate(lines, start=1):
        for text in inserts.get(number, ()):
            indent = line[: len(line) - len(line.lstrip(" \t"))]
            newline = "\r\n" if line.endswith("\r\n") else "\n"
            out.append(f"{indent}// {text}{newline}")
        out.append(line)
    return "".join(out)


def annotation_line(stats: MethodStats, window: WindowConfig) -> str:
    hist = stats.histogram(window)
    return f"{label(sum(hist), window.days)} [{sparkline(hist)}]"


def method_lines(source: str | None, file_path: str) -> dict[str, int]:
    """Canonical identity -> start line for every method of ``source``."""
    if source is None:
        return {}
    return {m.identity.canonical: m.start_line for m in extract_methods(source, file_path)}


def render_hotspots(stats: list[MethodStats], n: int = 10, lines: dict[str, int] | None = None) -> str:
    """Rank table of the ``n`` first entries of an already sorted list."""
    lines = lines or {}
    rows = [("RANK", "METHOD", "CHANGES", "LOCATION")]
    for rank, s in enumerate(stats[:n], start=1):
        ident = s.identity
        line = lines.get(ident.canonical)
        where = f"{ident.file_path}:{line}" if line else ident.file_path
        params = ",".join(ident.param_types)
        rows.append((str(rank), f"{ident.qualified_name}({params})", str(s.total_changes), where))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    out = []
    for r in rows:
        out.append(
            f"{r[0]:>{widths[0]}}  {r[1]:<{widths[1]}}  {r[2]:>{widths[2]}}  {r[3]}".rstrip()
        )
    return "\n".join(out) + "\n"


def _iso(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).isoformat().replace("+00:00", "Z")


def render_json(
    stats: list[MethodStats], window: WindowConfig, lines: dict[str, int] | None = None
) -> str:
    """Serialize windowed statistics.

    ``generated_at`` is the window's end instant, which keeps the output a
    pure function of the store contents and the window.
    """
    lines = lines or {}
    methods = []
    for s in sorted(stats, key=lambda s: s.identity.canonical):
        hist = s.histogram(window)
        ident = s.identity
        methods.append(
            {
                "id": ident.canonical,
                "file": ident.file_path,
                "line": lines.get(ident.canonical, 0),
                "total": sum(hist),
                "daily": hist,
            }
        )
    doc = {"window_days": window.days, "generated_at": _iso(window.end_time), "methods": methods}
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def parse_json(text: str) -> tuple[list[MethodStats], int, str]:
    """Inverse of :func:`render_json`: statistics, window days, end date."""
    doc = json.loads(text)
    days = doc["window_days"]
    end = datetime.fromisoformat(doc["generated_at"].replace("Z", "+00:00"))
    window = WindowConfig(days=days, end_time=int(end.timestamp()))
    keys = window.day_keys()
    stats = []
    for entry in doc["methods"]:
        daily = {d: c for d, c in zip(keys, entry["daily"]) if c}
        stats.append(MethodStats(MethodIdentity.parse(entry["id"]), sum(daily.values()), daily))
    return stats, days, keys[-1]


def _page_name(file_path: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", file_path) + ".html"


_PAGE = """<!DOCTYPE html>
<html lang="en"><head><meta charset="utf-8"><title>{title}</title>
<style>
body {{ font-family: sans-serif; margin: 2em; }}
table {{ border-collapse: collapse; }}
td, th {{ padding: 2px 10px; text-align: left; border-bottom: 1px solid #ddd; }}
.chart rect {{ fill: #4a7bd0; }}
.method {{ margin: 1.5em 0; }}
code {{ font-size: 110%; }}
</style></head>
<body>
{body}
</body></html>
"""


def bar_chart(counts: list[int], days: list[str]) -> str:
    """Inline SVG bar chart; bar heights are proportional to the counts."""
    top = max(counts, default=0)
    width = BAR_WIDTH * len(counts)
    bars = []
    for k, (c, day) in enumerate(zip(counts, days)):
        h = round(CHART_HEIGHT * c / top, 3) if top else 0
        bars.append(
            f'<rect x="{k * BAR_WIDTH}" y="{CHART_HEIGHT - h}" width="{BAR_WIDTH - 2}" '
            f'height="{h}" data-day="{day}" data-count="{c}"><title>{day}: {c}</title></rect>'
        )
    return (
        f'<svg class="chart" xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{CHART_HEIGHT}" viewBox="0 0 {width} {CHART_HEIGHT}">' + "".join(bars) + "</svg>"
    )


def render_html(
    stats: list[MethodStats],
    window: WindowConfig,
    out_dir: str | PathLike,
    lines: dict[str, int] | None = None,
    top_n: int = 10,
) -> list[Path]:
    """Write an index page plus one page per file; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = lines or {}
    days = window.day_keys()
    windowed = [s.restricted(window) for s in stats]
    windowed = [s for s in windowed if s.total_changes]
    by_file: dict[str, list[MethodStats]] = {}
    for s in windowed:
        by_file.setdefault(s.identity.file_path, []).append(s)

    written = []
    ranked = sorted(windowed, key=lambda s: (-s.total_changes, s.identity.canonical))[:top_n]
    rows = []
    for rank, s in enumerate(ranked, start=1):
        ident = s.identity
        line = lines.get(ident.canonical)
        where = f"{ident.file_path}:{line}" if line else ident.file_path
        rows.append(
            f"<tr><td>{rank}</td><td><code>{html.escape(ident.qualified_name)}"
            f"({html.escape(','.join(ident.param_types))})</code></td>"
            f"<td>{s.total_changes}</td>"
            f'<td><a href="{_page_name(ident.file_path)}">{html.escape(where)}</a></td></tr>'
        )
    files = "".join(
        f'<li><a href="{_page_name(p)}">{html.escape(p)}</a></li>' for p in sorted(by_file)
    )
    index_body = (
        f"<h1>Most frequently changed methods</h1>"
        f"<p>Window: {window.days} days ending {days[-1]}</p>"
        f'<table class="hotspots"><tr><th>Rank</th><th>Method</th><th>Changes</th>'
        f"<th>Location</th></tr>{''.join(rows)}</table>"
        f"<h2>Files</h2><ul>{files}</ul>"
    )
    index = out / "index.html"
    index.write_text(_PAGE.format(title="Method hotspots", body=index_body), encoding="utf-8")
    written.append(index)

    for path, items in sorted(by_file.items()):
        items.sort(key=lambda s: (lines.get(s.identity.canonical, 0), s.identity.canonical))
        blocks = []
        for s in items:
            ident = s.identity
            blocks.append(
                f'<div class="method" data-id="{html.escape(ident.canonical)}">'
                f"<code>{html.escape(ident.qualified_name)}({html.escape(','.join(ident.param_types))})</code>"
                f" line {lines.get(ident.canonical, '?')}: {label(s.total_changes, window.days)}<br>"
                f"{bar_chart(s.histogram(window), days)}</div>"
            )
        body = f'<p><a href="index.html">index</a></p><h1>{html.escape(path)}</h1>' + "".join(blocks)
        page = out / _page_name(path)
        page.write_text(_PAGE.format(title=html.escape(path), body=body), encoding="utf-8")
        written.append(page)
    return written
