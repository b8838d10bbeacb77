"""Command-line front end.

Exit codes are frozen:

    0  success
    1  validation failure (lore validate) or an aborted interactive flow
    2  usage error (unknown command, bad flags)
    3  repository or environment error (not a repo, unknown path, git failed)
    4  data error (bad JSON, schema violation, bad duration, bad config)

Result data is written to stdout only; prompts, warnings and diagnostics
go to stderr only. Machine output is requested with ``--format json``.
Environment: ``LORE_GIT`` overrides the git executable; ``NO_COLOR`` is
honored (lore emits no styling in any case).
"""

from __future__ import annotations

import argparse
import sys

from . import authoring, queries
from .config import load_config, parse_duration
from .errors import AbortedError, DataError, LoreError, RepoError
from .queries import QueryOptions
from .render import render_human, render_json
from .repo import create_commit, repo_root

PROG = "lore"
DESCRIPTION = "Lore -- Query and author institutional knowledge from git history"

EPILOG = """\
lore reads decision records (constraints, rejected alternatives,
directives, test claims) straight out of git trailers in commit
messages; there is no index and no server. Repositories may tune
defaults in a .lore file at the work-tree root.
"""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be zero or a positive integer")
    return value


def _add_common_query_flags(p: argparse.ArgumentParser, with_max_count: bool = True):
    p.add_argument(
        "--format",
        choices=("human", "json"),
        default="human",
        help="output format (default: human)",
    )
    if with_max_count:
        p.add_argument(
            "--max-count",
            type=_positive_int,
            metavar="N",
            help="limit how many commits are examined",
        )
    p.add_argument(
        "--include-merges",
        action="store_true",
        help="include merge commits (excluded by default)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description=DESCRIPTION,
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    p = sub.add_parser(
        "context",
        help="Full lore summary for a code region",
        description="Full lore summary for a code region.",
    )
    p.add_argument("path", help="file or directory, relative to the repo root")
    _add_common_query_flags(p)
    p.add_argument(
        "--depth",
        type=_non_negative_int,
        default=0,
        metavar="N",
        help="also follow Related chains up to N hops (default: 0, off)",
    )

    p = sub.add_parser(
        "constraints",
        help="Active constraints shaping this code",
        description="Active constraints shaping this code.",
    )
    p.add_argument("path", help="file or directory, relative to the repo root")
    _add_common_query_flags(p)

    p = sub.add_parser(
        "rejected",
        help="Previously rejected alternatives",
        description="Previously rejected alternatives.",
    )
    p.add_argument("path", help="file or directory, relative to the repo root")
    _add_common_query_flags(p)

    p = sub.add_parser(
        "directives",
        help="Forward-looking warnings",
        description="Forward-looking warnings.",
    )
    p.add_argument("path", help="file or directory, relative to the repo root")
    _add_common_query_flags(p)

    p = sub.add_parser(
        "coverage",
        help="Test coverage map",
        description=(
            "Test coverage map. Reports the Tested/Not-tested claims recorded "
            "in commit trailers; it does not instrument code or measure "
            "executed-line coverage."
        ),
    )
    p.add_argument("path", help="file or directory, relative to the repo root")
    _add_common_query_flags(p)

    p = sub.add_parser(
        "stale",
        help="Flag outdated assumptions",
        description=(
            "Flag outdated assumptions: constraints and directives whose "
            "source commit is older than the threshold and whose path has "
            "been modified since."
        ),
    )
    p.add_argument("path", nargs="?", default=None, help="optional path scope")
    p.add_argument(
        "--older-than",
        metavar="DURATION",
        help="age threshold like 90d, 12w, 6m, 1y (default: from .lore or 180d)",
    )
    _add_common_query_flags(p, with_max_count=False)

    p = sub.add_parser(
        "commit",
        help="Interactive commit builder",
        description=(
            "Interactive commit builder. With --from-json, commit from "
            "structured input instead of prompting."
        ),
    )
    p.add_argument(
        "--from-json",
        metavar="FILE",
        help="read a structured lore document from FILE ('-' for stdin)",
    )
    p.add_argument(
        "--allow-empty",
        action="store_true",
        help="permit committing with nothing staged",
    )
    p.add_argument(
        "--format",
        choices=("human", "json"),
        default="human",
        help="output format (default: human)",
    )

    p = sub.add_parser(
        "validate",
        help="Check recent commits for lore format",
        description="Check recent commits for lore format.",
    )
    p.add_argument(
        "range",
        nargs="?",
        default=None,
        help="revision range such as HEAD~20..HEAD (default: last N commits)",
    )
    p.add_argument(
        "--last",
        type=_positive_int,
        metavar="N",
        help="check the last N commits (default: from .lore or 20)",
    )
    p.add_argument(
        "--strict",
        action="store_true",
        help="treat warnings as failures too",
    )
    p.add_argument(
        "--format",
        choices=("human", "json"),
        default="human",
        help="output format (default: human)",
    )
    p.add_argument(
        "--include-merges",
        action="store_true",
        help="include merge commits (skipped by default)",
    )
    return parser


class ConsolePromptIO:
    """Interactive channel: prompts on stderr, answers from stdin."""

    def ask(self, prompt: str) -> str:
        sys.stderr.write(prompt)
        sys.stderr.flush()
        try:
            line = sys.stdin.readline()
        except (OSError, ValueError, KeyboardInterrupt) as exc:
            raise AbortedError(f"input unavailable ({exc})") from None
        if line == "":
            raise AbortedError("input closed")
        return line.rstrip("\n")

    def show(self, text: str) -> None:
        sys.stderr.write(text + "\n")


def _emit(result, fmt: str, path: str | None = None):
    if fmt == "json":
        print(render_json(result))
    else:
        print(render_human(result, path))


def _load_repo_config():
    root = repo_root()
    cfg = load_config(root)
    for warning in cfg.warnings:
        print(f"{PROG}: warning: {warning}", file=sys.stderr)
    return cfg


def _query_opts(args) -> QueryOptions:
    return QueryOptions(
        max_count=getattr(args, "max_count", None),
        include_merges=args.include_merges,
    )


def _cmd_context(args) -> int:
    _load_repo_config()
    result = queries.context(
        args.path, _query_opts(args), related_depth=args.depth
    )
    _emit(result, args.format, args.path)
    return 0


def _cmd_constraints(args) -> int:
    cfg = _load_repo_config()
    result = queries.constraints(
        args.path, _query_opts(args), older_than=cfg.stale_older_than_default
    )
    _emit(result, args.format, args.path)
    return 0


def _cmd_rejected(args) -> int:
    _load_repo_config()
    _emit(queries.rejected(args.path, _query_opts(args)), args.format, args.path)
    return 0


def _cmd_directives(args) -> int:
    _load_repo_config()
    _emit(queries.directives(args.path, _query_opts(args)), args.format, args.path)
    return 0


def _cmd_coverage(args) -> int:
    _load_repo_config()
    _emit(queries.coverage(args.path, _query_opts(args)), args.format, args.path)
    return 0


def _cmd_stale(args) -> int:
    cfg = _load_repo_config()
    if args.older_than is not None:
        try:
            seconds = parse_duration(args.older_than)
        except DataError as exc:
            raise DataError("bad-duration", f"--older-than: {exc.args[0]}") from None
    else:
        seconds = cfg.stale_older_than_default
    result = queries.stale(
        args.path,
        seconds,
        QueryOptions(include_merges=args.include_merges),
    )
    _emit(result, args.format, args.path)
    return 0


def _cmd_commit(args) -> int:
    if args.from_json is not None:
        if args.from_json == "-":
            try:
                doc = sys.stdin.read()
            except (OSError, ValueError) as exc:
                raise DataError("bad-json", f"cannot read stdin: {exc}") from None
        else:
            try:
                with open(args.from_json, encoding="utf-8", errors="replace") as fh:
                    doc = fh.read()
            except OSError as exc:
                raise RepoError("git-failed", f"cannot read {args.from_json}: {exc}") from None
        draft = authoring.build_from_structured(doc)
    else:
        draft = authoring.build_interactive(ConsolePromptIO())

    message = draft.to_message()
    commit_hash = create_commit(message, allow_empty_stage=args.allow_empty)
    if args.format == "json":
        print(render_json({"hash": commit_hash}))
    else:
        print(commit_hash)
    return 0


def _cmd_validate(args) -> int:
    cfg = _load_repo_config()
    threshold = "warning" if (args.strict or cfg.strict_validate) else "error"
    report = authoring.validate(
        rev_range=args.range,
        last_n=args.last or cfg.validate_window_default,
        threshold=threshold,
        required_trailers=cfg.required_trailers,
        include_merges=args.include_merges,
    )
    _emit(report, args.format)
    return 0 if report.passed else 1


_HANDLERS = {
    "context": _cmd_context,
    "constraints": _cmd_constraints,
    "rejected": _cmd_rejected,
    "directives": _cmd_directives,
    "coverage": _cmd_coverage,
    "stale": _cmd_stale,
    "commit": _cmd_commit,
    "validate": _cmd_validate,
}


def dispatch(argv: list[str]) -> int:
    """Parse argv, run the command, and return the exit code.

    Never raises: every failure class maps to one of the documented exit
    codes, with the diagnostic on stderr.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 2
        return code

    if args.command is None:
        parser.print_help(sys.stderr)
        return 2

    handler = _HANDLERS[args.command]
    try:
        return handler(args)
    except AbortedError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 4
    except RepoError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 3
    except LoreError as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except KeyboardInterrupt:
        print(f"{PROG}: interrupted", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"{PROG}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
