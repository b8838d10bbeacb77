"""Adapter over the git executable: enumerate, read and create commits.

Everything goes through the standard git binary found on PATH (override
with the ``LORE_GIT`` environment variable); no git library is linked in.
Commit data is read with the frozen NUL-delimited format

    %H %x00 %an %x00 %ae %x00 %at %x00 %B

(one ``git log -z`` record per commit), which keeps messages verbatim and
unambiguous regardless of their content. Enumeration order is author date
descending with the full hash as tiebreak, so every consumer sees one
deterministic order even in backdated histories.
"""

from __future__ import annotations

import os
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .errors import GitFailedError, RepoError

LOG_FORMAT = "%H%x00%an%x00%ae%x00%at%x00%B"
FULL_HASH_RE = re.compile(r"^[0-9a-f]{40}$")
HASH_REF_RE = re.compile(r"^[0-9a-fA-F]{7,40}$")


@dataclass(frozen=True)
class CommitRecord:
    """Raw commit metadata plus the verbatim message text."""

    hash: str
    author_name: str
    author_email: str
    author_date: int  # unix epoch seconds, UTC
    message: str
    touched_paths: tuple[str, ...] | None = None


@dataclass(frozen=True)
class HistoryQuery:
    """Parameters for one history enumeration.

    ``follow_renames=None`` picks the default: follow for paths that are
    files in the work tree, do not follow for directories. ``rev_range``
    accepts any git revision range expression (``HEAD~5..HEAD``).
    """

    path: str | None = None
    max_count: int | None = None
    since: int | str | None = None
    until: int | str | None = None
    follow_renames: bool | None = None
    include_merges: bool = False
    rev_range: str | None = None


def _git_executable() -> str:
    return os.environ.get("LORE_GIT", "git")


def _run_git(
    args: list[str], cwd: str | Path | None = None, input_bytes: bytes | None = None
) -> subprocess.CompletedProcess:
    cmd = [_git_executable(), *args]
    try:
        return subprocess.run(
            cmd,
            cwd=str(cwd) if cwd is not None else None,
            input=input_bytes,
            capture_output=True,
            check=False,
        )
    except FileNotFoundError as exc:
        raise GitFailedError(f"git executable not found: {cmd[0]}") from exc
    except NotADirectoryError as exc:
        raise RepoError("not-a-repo", f"no such working directory: {cwd}") from exc


def _git_text(args: list[str], cwd: str | Path | None = None) -> str:
    proc = _run_git(args, cwd=cwd)
    stderr = proc.stderr.decode("utf-8", errors="replace")
    if proc.returncode != 0:
        if "not a git repository" in stderr.lower():
            raise RepoError("not-a-repo", "not inside a git work tree")
        raise GitFailedError(
            f"git {' '.join(args[:2])} failed", stderr=stderr, exit_code=proc.returncode
        )
    return proc.stdout.decode("utf-8", errors="replace")


def repo_root(cwd: str | Path | None = None) -> Path:
    """Absolute path of the enclosing work tree root."""
    out = _git_text(["rev-parse", "--show-toplevel"], cwd=cwd)
    return Path(out.strip())


def _head_exists(cwd: str | Path | None) -> bool:
    proc = _run_git(["rev-parse", "--verify", "--quiet", "HEAD"], cwd=cwd)
    return proc.returncode == 0


def _normalize_path(path: str) -> str:
    clean = path.replace(os.sep, "/").strip("/")
    while clean.startswith("./"):
        clean = clean[2:]
    return clean


def _path_in_head(path: str, cwd: str | Path | None) -> bool:
    proc = _run_git(["cat-file", "-e", f"HEAD:{path}"], cwd=cwd)
    return proc.returncode == 0


def _parse_records(raw: bytes) -> list[CommitRecord]:
    fields = raw.decode("utf-8", errors="replace").split("\0")
    if fields and fields[-1] == "":
        fields.pop()
    if len(fields) % 5 != 0:
        raise GitFailedError(
            f"unexpected log record shape ({len(fields)} fields)", stderr="", exit_code=0
        )
    records = []
    for i in range(0, len(fields), 5):
        commit_hash, name, email, date, message = fields[i : i + 5]
        records.append(
            CommitRecord(
                hash=commit_hash,
                author_name=name,
                author_email=email,
                author_date=int(date),
                message=message,
                touched_paths=None,
            )
        )
    return records


def list_commits(
    query: HistoryQuery | None = None, cwd: str | Path | None = None
) -> list[CommitRecord]:
    """Enumerate commits, optionally path-scoped, newest first.

    Path scoping keeps exactly the commits whose diff against their parent
    touches the path (subtree semantics for directories); rename-following
    applies to file paths unless disabled. Merge commits are excluded
    unless ``include_merges`` is set. An empty repository yields an empty
    list; a path that never existed in history raises ``unknown-path``.
    """
    query = query or HistoryQuery()
    repo_root(cwd)  # raises not-a-repo outside a work tree
    path = _normalize_path(query.path) if query.path is not None else None

    if not _head_exists(cwd):
        if path is not None:
            raise RepoError("unknown-path", f"path {path!r} has no history (empty repository)")
        return []

    follow = query.follow_renames
    if follow is None and path is not None:
        follow = (repo_root(cwd) / path).is_file()

    args = ["log", "-z", f"--format={LOG_FORMAT}"]
    if not query.include_merges:
        args.append("--no-merges")
    if query.max_count is not None:
        if query.max_count < 1:
            raise ValueError("max_count must be a positive integer")
        args.append(f"--max-count={query.max_count}")
    if query.since is not None:
        args.append(f"--since=@{query.since}" if isinstance(query.since, int) else f"--since={query.since}")
    if query.until is not None:
        args.append(f"--until=@{query.until}" if isinstance(query.until, int) else f"--until={query.until}")
    if query.rev_range is not None:
        args.append(query.rev_range)
    if path is not None:
        # --full-history keeps every commit whose diff touches the path;
        # the default simplification would drop some of them around merges.
        if follow:
            args.append("--follow")
        else:
            args.append("--full-history")
        args.extend(["--", path])

    proc = _run_git(args, cwd=cwd)
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", errors="replace")
        raise GitFailedError("git log failed", stderr=stderr, exit_code=proc.returncode)

    records = _parse_records(proc.stdout)
    if not records and path is not None and not _path_in_head(path, cwd):
        raise RepoError("unknown-path", f"path {path!r} never existed in history")
    records.sort(key=lambda r: (-r.author_date, r.hash))
    return records


def read_commit(hash_ref: str, cwd: str | Path | None = None) -> CommitRecord:
    """Resolve a 7-40 char hex reference to its full commit record."""
    repo_root(cwd)
    ref = hash_ref.strip()
    if not HASH_REF_RE.match(ref):
        raise RepoError("unknown-commit", f"{hash_ref!r} is not a 7-40 char hex reference")

    proc = _run_git(["rev-parse", "--verify", "--quiet", f"{ref}^{{commit}}"], cwd=cwd)
    if proc.returncode != 0:
        listing = _run_git(["rev-parse", f"--disambiguate={ref.lower()}"], cwd=cwd)
        candidates = [ln for ln in listing.stdout.decode().splitlines() if ln.strip()]
        if len(candidates) > 1:
            raise RepoError(
                "ambiguous-prefix",
                f"{ref!r} matches {len(candidates)} objects; give more characters",
            )
        raise RepoError("unknown-commit", f"no commit found for {ref!r}")

    full = proc.stdout.decode().strip()
    log = _run_git(["log", "-1", "-z", f"--format={LOG_FORMAT}", full], cwd=cwd)
    if log.returncode != 0:
        raise GitFailedError(
            "git log failed",
            stderr=log.stderr.decode("utf-8", errors="replace"),
            exit_code=log.returncode,
        )
    records = _parse_records(log.stdout)
    if len(records) != 1:
        raise RepoError("unknown-commit", f"no commit found for {ref!r}")
    return records[0]


def create_commit(
    message: str, allow_empty_stage: bool = False, cwd: str | Path | None = None
) -> str:
    """Commit the staged changes with exactly the given message bytes.

    Uses verbatim cleanup so the stored message round-trips byte-for-byte.
    Returns the new commit's full hash.
    """
    repo_root(cwd)
    staged = _run_git(["diff", "--cached", "--quiet"], cwd=cwd)
    if staged.returncode == 0 and not allow_empty_stage:
        raise RepoError("nothing-staged", "no staged changes to commit")

    args = ["commit", "--quiet", "--cleanup=verbatim", "--allow-empty-message", "-F", "-"]
    if allow_empty_stage:
        args.append("--allow-empty")
    proc = _run_git(args, cwd=cwd, input_bytes=message.encode("utf-8"))
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", errors="replace")
        raise GitFailedError("git commit failed", stderr=stderr, exit_code=proc.returncode)
    return _git_text(["rev-parse", "HEAD"], cwd=cwd).strip()


def touched_paths_map(
    hashes: list[str], cwd: str | Path | None = None
) -> dict[str, tuple[str, ...]]:
    """Map each commit hash to the repository paths its diff touches.

    One batched ``git diff-tree --stdin`` call; merge commits map to an
    empty tuple (their combined diff is suppressed without ``-m``).
    """
    if not hashes:
        return {}
    proc = _run_git(
        ["diff-tree", "--stdin", "--name-only", "-r", "--root", "-z"],
        cwd=cwd,
        input_bytes=("\n".join(hashes) + "\n").encode("ascii"),
    )
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", errors="replace")
        raise GitFailedError("git diff-tree failed", stderr=stderr, exit_code=proc.returncode)

    tokens = proc.stdout.decode("utf-8", errors="replace").split("\0")
    if tokens and tokens[-1] == "":
        tokens.pop()
    result: dict[str, tuple[str, ...]] = {h: () for h in hashes}
    expected = set(hashes)
    current: str | None = None
    paths: list[str] = []
    for token in tokens:
        # diff-tree echoes the 40-hex commit id before its paths
        if FULL_HASH_RE.match(token.strip()) and token.strip() in expected:
            if current is not None:
                result[current] = tuple(paths)
            current = token.strip()
            paths = []
        elif current is not None:
            paths.append(token)
    if current is not None:
        result[current] = tuple(paths)
    return result
