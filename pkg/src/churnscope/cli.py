"""Command line entry point: ``churnscope <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from churnscope.model import DEFAULT_DAYS, DEFAULT_TOP_N, WindowConfig
from churnscope.pipeline import RunConfig, StoreLocked, default_db_path, process_window
from churnscope.refactoring import Thresholds
from churnscope.report import annotate_file, method_lines, render_hotspots, render_html, render_json
from churnscope.store import StoreCorrupt, open_store
from churnscope.vcs import CorruptRepo, NoVcsRoot, open_repo

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_VCS = 2
EXIT_STORE_CORRUPT = 3
EXIT_REPO_CORRUPT = 4

log = logging.getLogger("churnscope")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _end_time(text: str) -> int:
    if text.lstrip("-").isdigit():
        return int(text)
    try:
        moment = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as ex:
        raise argparse.ArgumentTypeError(f"not an epoch or ISO-8601 time: {text}") from ex
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return int(moment.timestamp())


def _ratio(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("must be in (0, 1]")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--repo", type=Path, default=Path("."), help="repository path (default: .)")
    common.add_argument("--days", type=_positive, default=DEFAULT_DAYS, help="window length in days")
    common.add_argument("--end-time", type=_end_time, default=None,
                        help="window end, epoch seconds or ISO-8601 (default: now)")
    common.add_argument("--db", type=Path, default=None,
                        help="statistics database (default: <repo>/.churnscope/stats.db)")
    common.add_argument("--top", type=_positive, default=DEFAULT_TOP_N, help="hotspot list length")
    common.add_argument("--format", choices=("text", "json", "html"), default="text")
    common.add_argument("--out", type=Path, default=None, help="output file or directory")
    common.add_argument("--rename-threshold", type=_ratio, default=Thresholds.rename)
    common.add_argument("--move-threshold", type=_ratio, default=Thresholds.move)
    common.add_argument("--containment", type=_ratio, default=Thresholds.containment)
    common.add_argument("--no-count-renames", dest="count_renames", action="store_false")
    common.add_argument("--rebuild", action="store_true", help="drop the database and rescan")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="churnscope", description="Per-method change frequency from Git history.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("scan", parents=[common], help="process new commits in the window")
    annotate = sub.add_parser("annotate", parents=[common], help="print a file with change labels")
    annotate.add_argument("file", type=Path)
    sub.add_parser("hotspots", parents=[common], help="most frequently changed methods")
    sub.add_parser("export-json", parents=[common], help="all windowed statistics as JSON")
    sub.add_parser("export-html", parents=[common], help="static HTML report")
    sub.add_parser("prune", parents=[common], help="drop statistics older than the window")
    return parser


def _config(args) -> RunConfig:
    window = WindowConfig(days=args.days) if args.end_time is None else WindowConfig(
        days=args.days, end_time=args.end_time
    )
    return RunConfig(
        repo_path=args.repo,
        window=window,
        db_path=args.db,
        thresholds=Thresholds(
            rename=args.rename_threshold, move=args.move_threshold, containment=args.containment
        ),
        count_renames=args.count_renames,
        top_n=args.top,
        rebuild=args.rebuild,
    )


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _lines_for(repo, stats) -> dict[str, int]:
    lines: dict[str, int] = {}
    for path in sorted({s.identity.file_path for s in stats}):
        lines.update(method_lines(repo.read_head_file(path), path))
    return lines


def _run(args) -> int:
    config = _config(args)
    if args.command == "scan":
        summary = process_window(config)
        if args.format == "json":
            _emit(json.dumps(summary.as_dict(), indent=2) + "\n", args.out)
        else:
            d = summary.as_dict()
            events = ", ".join(f"{k}={v}" for k, v in d["events_by_kind"].items()) or "none"
            _emit(
                f"commits: {d['commits_seen']} seen, {d['commits_processed']} processed, "
                f"{d['commits_skipped_cached']} already cached\n"
                f"files: {d['files_parsed']} parsed, {d['parse_failures']} skipped\n"
                f"refactorings: {events}\n",
                args.out,
            )
        return EXIT_OK

    with open_repo(config.repo_path) as repo:
        db_path = config.db_path or default_db_path(repo.root)
        if not Path(db_path).exists():
            log.warning("no statistics at %s yet; run `churnscope scan` first", db_path)
            db_path = ":memory:"
        with open_store(db_path) as store:
            window = config.window
            if args.command == "annotate":
                target = args.file if args.file.is_absolute() else Path.cwd() / args.file
                if not target.exists():
                    target = repo.root / args.file
                if not target.exists():
                    raise UsageError(f"no such file: {args.file}")
                rel = target.resolve().relative_to(repo.root).as_posix()
                source = target.read_text(encoding="utf-8", errors="replace")
                _emit(annotate_file(source, store.load_file_stats(rel, window), window, rel), args.out)
            elif args.command == "hotspots":
                stats = store.top_hotspots(config.top_n, window)
                lines = _lines_for(repo, stats)
                if args.format == "json":
                    _emit(render_json(stats, window, lines), args.out)
                elif args.format == "html":
                    out_dir = args.out or repo.root / ".churnscope" / "html"
                    render_html(stats, window, out_dir, lines, config.top_n)
                    print(out_dir / "index.html")
                else:
                    _emit(render_hotspots(stats, config.top_n, lines), args.out)
            elif args.command == "export-json":
                stats = store.load_window(window)
                _emit(render_json(stats, window, _lines_for(repo, stats)), args.out)
            elif args.command == "export-html":
                stats = store.load_window(window)
                out_dir = args.out or repo.root / ".churnscope" / "html"
                render_html(stats, window, out_dir, _lines_for(repo, stats), config.top_n)
                print(out_dir / "index.html")
            elif args.command == "prune":
                removed = store.prune(window)
                print(f"removed {removed} daily rows older than {window.day_keys()[0]}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as ex:
        print(f"churnscope: {ex}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return _run(args)
    except UsageError as ex:
        print(f"churnscope: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except NoVcsRoot as ex:
        print(f"churnscope: warning: {ex}; nothing to analyze", file=sys.stderr)
        return EXIT_NO_VCS
    except StoreCorrupt as ex:
        print(f"churnscope: {ex}; rerun `churnscope scan --rebuild` to recreate it", file=sys.stderr)
        return EXIT_STORE_CORRUPT
    except StoreLocked as ex:
        print(f"churnscope: {ex}", file=sys.stderr)
        return EXIT_STORE_CORRUPT
    except CorruptRepo as ex:
        print(f"churnscope: {ex}", file=sys.stderr)
        return EXIT_REPO_CORRUPT


if __name__ == "__main__":
    sys.exit(main())
