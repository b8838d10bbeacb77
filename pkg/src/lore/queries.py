"""Path-scoped aggregation of decision records over repository history.

All queries share one pipeline: enumerate the commits touching a path,
parse every message, then fold the resulting atoms newest-first. "Newest"
is always the (author_date, hash) order established by the repo layer, so
results are deterministic even when timestamps collide. Commits without a
trailer block (or whose message fails to parse) are counted, never
errors: a repository with no lore in it simply produces empty results.

There is no cache and no index; every query recomputes from history.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .atoms import Finding, LoreAtom, parse_message
from .config import DEFAULT_STALE_SECONDS
from .errors import RepoError
from .repo import (
    CommitRecord,
    HistoryQuery,
    list_commits,
    read_commit,
    touched_paths_map,
)

STALE_RULE = "age+later-touch"


@dataclass(frozen=True)
class AttributedAtom:
    atom: LoreAtom
    commit: CommitRecord


@dataclass(frozen=True)
class ContextSummary:
    """Everything lore knows about one code path.

    ``counts`` maps trailer kinds to entry totals across the atoms,
    omitting zero counts. ``related`` holds atoms pulled in by following
    Related chains (empty unless requested).
    """

    path: str
    atoms: tuple[AttributedAtom, ...]
    counts: dict[str, int]
    non_lore_commits: int
    related: tuple[AttributedAtom, ...] = ()


@dataclass(frozen=True)
class ConstraintRecord:
    text: str
    source_hash: str
    author_date: int
    stale: bool


@dataclass(frozen=True)
class ConstraintSet:
    entries: tuple[ConstraintRecord, ...]


@dataclass(frozen=True)
class RejectedRecord:
    alternative: str
    reason: str | None
    source_hash: str
    author_date: int


@dataclass(frozen=True)
class RejectedLedger:
    entries: tuple[RejectedRecord, ...]


@dataclass(frozen=True)
class DirectiveRecord:
    text: str
    source_hash: str
    author_date: int


@dataclass(frozen=True)
class DirectiveList:
    entries: tuple[DirectiveRecord, ...]


@dataclass(frozen=True)
class TestedRecord:
    description: str
    method: str | None
    source_hash: str
    author_date: int


@dataclass(frozen=True)
class NotTestedRecord:
    description: str
    source_hash: str
    author_date: int


@dataclass(frozen=True)
class CoverageMap:
    tested: tuple[TestedRecord, ...]
    not_tested: tuple[NotTestedRecord, ...]


@dataclass(frozen=True)
class StaleEntry:
    kind: str  # "constraint" | "directive"
    text: str
    source_hash: str
    author_date: int
    rule: str
    later_touch_count: int
    paths: tuple[str, ...]


@dataclass(frozen=True)
class StaleReport:
    entries: tuple[StaleEntry, ...]


@dataclass(frozen=True)
class ChainResult:
    """Atoms reached by following Related references breadth-first.

    Unresolvable or unparseable links become findings, not errors.
    """

    atoms: tuple[AttributedAtom, ...]
    findings: tuple[Finding, ...] = ()


@dataclass(frozen=True)
class QueryOptions:
    max_count: int | None = None
    include_merges: bool = False
    follow_renames: bool | None = None


def _order_key(record: CommitRecord) -> tuple[int, str]:
    return (record.author_date, record.hash)


def _is_later(record: CommitRecord, than: CommitRecord) -> bool:
    return _order_key(record) > _order_key(than)


def _enumerate(
    path: str | None, opts: QueryOptions, cwd
) -> list[tuple[CommitRecord, LoreAtom | None]]:
    """All commits on the path, newest first, with their parsed atom.

    The atom is None for messages that fail to parse; atoms without any
    trailer block count as non-lore at the fold stage.
    """
    records = list_commits(
        HistoryQuery(
            path=path,
            max_count=opts.max_count,
            include_merges=opts.include_merges,
            follow_renames=opts.follow_renames,
        ),
        cwd=cwd,
    )
    return [(record, parse_message(record.message).atom) for record in records]


def _lore_pairs(
    parsed: list[tuple[CommitRecord, LoreAtom | None]]
) -> list[AttributedAtom]:
    return [
        AttributedAtom(atom, record)
        for record, atom in parsed
        if atom is not None and atom.has_trailers
    ]


def context(
    path: str,
    opts: QueryOptions = QueryOptions(),
    *,
    related_depth: int = 0,
    cwd=None,
) -> ContextSummary:
    """Full decision history for a path, newest first."""
    parsed = _enumerate(path, opts, cwd)
    atoms = _lore_pairs(parsed)
    non_lore = len(parsed) - len(atoms)

    counts: dict[str, int] = {}
    for att in atoms:
        for kind, amount in (
            ("constraints", len(att.atom.constraints)),
            ("rejected", len(att.atom.rejected)),
            ("directives", len(att.atom.directives)),
            ("tested", len(att.atom.tested)),
            ("not_tested", len(att.atom.not_tested)),
            ("related", len(att.atom.related)),
            ("extensions", len(att.atom.extensions)),
        ):
            if amount:
                counts[kind] = counts.get(kind, 0) + amount

    related: tuple[AttributedAtom, ...] = ()
    if related_depth > 0 and atoms:
        seen = {att.commit.hash for att in atoms}
        extra: list[AttributedAtom] = []
        for att in atoms:
            chain = related_chain(att.commit.hash, related_depth, cwd=cwd)
            for linked in chain.atoms:
                if linked.commit.hash not in seen:
                    seen.add(linked.commit.hash)
                    extra.append(linked)
        related = tuple(extra)

    return ContextSummary(
        path=path,
        atoms=tuple(atoms),
        counts=counts,
        non_lore_commits=non_lore,
        related=related,
    )


def _normalize_constraint(text: str) -> str:
    return " ".join(text.split())


def _later_touch_count(
    source: CommitRecord, all_records: list[CommitRecord]
) -> int:
    return sum(1 for record in all_records if _is_later(record, source))


def _is_stale(
    source: CommitRecord,
    all_records: list[CommitRecord],
    older_than: int,
    now: int,
) -> tuple[bool, int]:
    later = _later_touch_count(source, all_records)
    aged = source.author_date < now - older_than
    return (aged and later >= 1), later


def constraints(
    path: str,
    opts: QueryOptions = QueryOptions(),
    *,
    older_than: int | None = None,
    now: int | None = None,
    cwd=None,
) -> ConstraintSet:
    """Active constraints on a path: newest first, deduplicated by
    whitespace-normalized text, newest source wins."""
    older_than = DEFAULT_STALE_SECONDS if older_than is None else older_than
    now = int(time.time()) if now is None else now
    parsed = _enumerate(path, opts, cwd)
    all_records = [record for record, _ in parsed]

    entries: list[ConstraintRecord] = []
    seen: set[str] = set()
    for att in _lore_pairs(parsed):
        for entry in att.atom.constraints:
            key = _normalize_constraint(entry.text)
            if key in seen:
                continue
            seen.add(key)
            stale_flag, _ = _is_stale(att.commit, all_records, older_than, now)
            entries.append(
                ConstraintRecord(
                    text=entry.text,
                    source_hash=att.commit.hash,
                    author_date=att.commit.author_date,
                    stale=stale_flag,
                )
            )
    return ConstraintSet(tuple(entries))


def rejected(
    path: str, opts: QueryOptions = QueryOptions(), *, cwd=None
) -> RejectedLedger:
    """Every rejected alternative on the path, newest first, duplicates
    kept: re-rejection is a signal in itself."""
    entries = [
        RejectedRecord(
            alternative=entry.alternative,
            reason=entry.reason,
            source_hash=att.commit.hash,
            author_date=att.commit.author_date,
        )
        for att in _lore_pairs(_enumerate(path, opts, cwd))
        for entry in att.atom.rejected
    ]
    return RejectedLedger(tuple(entries))


def directives(
    path: str, opts: QueryOptions = QueryOptions(), *, cwd=None
) -> DirectiveList:
    entries = [
        DirectiveRecord(
            text=entry.text,
            source_hash=att.commit.hash,
            author_date=att.commit.author_date,
        )
        for att in _lore_pairs(_enumerate(path, opts, cwd))
        for entry in att.atom.directives
    ]
    return DirectiveList(tuple(entries))


def coverage(
    path: str, opts: QueryOptions = QueryOptions(), *, cwd=None
) -> CoverageMap:
    """Tested/Not-tested claims on the path.

    A not-tested claim is dropped once a strictly newer commit records a
    tested claim with the exact same description (the gap was closed).
    """
    pairs = _lore_pairs(_enumerate(path, opts, cwd))

    tested: list[TestedRecord] = []
    for att in pairs:
        for entry in att.atom.tested:
            tested.append(
                TestedRecord(
                    description=entry.description,
                    method=entry.method,
                    source_hash=att.commit.hash,
                    author_date=att.commit.author_date,
                )
            )

    tested_index: dict[str, list[tuple[int, str]]] = {}
    for att in pairs:
        for entry in att.atom.tested:
            tested_index.setdefault(entry.description, []).append(
                (att.commit.author_date, att.commit.hash)
            )

    not_tested: list[NotTestedRecord] = []
    for att in pairs:
        source_key = (att.commit.author_date, att.commit.hash)
        for entry in att.atom.not_tested:
            resolved = any(
                later > source_key for later in tested_index.get(entry.description, [])
            )
            if not resolved:
                not_tested.append(
                    NotTestedRecord(
                        description=entry.description,
                        source_hash=att.commit.hash,
                        author_date=att.commit.author_date,
                    )
                )
    return CoverageMap(tuple(tested), tuple(not_tested))


def stale(
    scope: str | None,
    older_than: int | None = None,
    opts: QueryOptions = QueryOptions(),
    *,
    now: int | None = None,
    cwd=None,
) -> StaleReport:
    """Constraints and directives that look outdated.

    An entry is flagged only when both conditions hold: its source commit
    is older than the threshold, and at least one later commit touched
    the same path. With no scope the whole repository is scanned and each
    source commit is judged against its own touched paths.
    """
    older_than = DEFAULT_STALE_SECONDS if older_than is None else older_than
    now = int(time.time()) if now is None else now

    if scope is not None:
        parsed = _enumerate(scope, opts, cwd)
        all_records = [record for record, _ in parsed]
        entries: list[StaleEntry] = []
        for att in _lore_pairs(parsed):
            flagged, later = _is_stale(att.commit, all_records, older_than, now)
            if not flagged:
                continue
            entries.extend(
                _stale_entries_for(att, later, (scope,))
            )
        return StaleReport(tuple(entries))

    parsed = _enumerate(None, opts, cwd)
    all_records = [record for record, _ in parsed]
    touched = touched_paths_map([record.hash for record in all_records], cwd=cwd)
    entries = []
    for att in _lore_pairs(parsed):
        own_paths = set(touched.get(att.commit.hash, ()))
        if not own_paths:
            continue
        later = sum(
            1
            for record in all_records
            if _is_later(record, att.commit)
            and own_paths.intersection(touched.get(record.hash, ()))
        )
        aged = att.commit.author_date < now - older_than
        if aged and later >= 1:
            entries.extend(
                _stale_entries_for(att, later, tuple(sorted(own_paths)))
            )
    return StaleReport(tuple(entries))


def _stale_entries_for(
    att: AttributedAtom, later: int, paths: tuple[str, ...]
) -> list[StaleEntry]:
    out = []
    for kind, texts in (
        ("constraint", [c.text for c in att.atom.constraints]),
        ("directive", [d.text for d in att.atom.directives]),
    ):
        for text in texts:
            out.append(
                StaleEntry(
                    kind=kind,
                    text=text,
                    source_hash=att.commit.hash,
                    author_date=att.commit.author_date,
                    rule=STALE_RULE,
                    later_touch_count=later,
                    paths=paths,
                )
            )
    return out


def related_chain(hash_ref: str, max_depth: int, *, cwd=None) -> ChainResult:
    """Breadth-first traversal of Related references from one commit.

    Visits each commit once (cycles terminate), descends at most
    ``max_depth`` hops, and reports dangling or unparseable references as
    findings. Only an unresolvable root raises.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be a positive integer")

    root = read_commit(hash_ref, cwd=cwd)
    visited = {root.hash}
    queue: list[tuple[CommitRecord, int]] = [(root, 0)]
    atoms: list[AttributedAtom] = []
    findings: list[Finding] = []

    while queue:
        record, depth = queue.pop(0)
        report = parse_message(record.message)
        if report.atom is None:
            findings.append(
                Finding(
                    "warning",
                    "unparseable-commit",
                    f"commit {record.hash} has an unparseable message; chain not followed",
                    0,
                )
            )
            continue
        atoms.append(AttributedAtom(report.atom, record))
        if depth >= max_depth:
            continue
        for ref in report.atom.related:
            if not ref.is_valid:
                findings.append(
                    Finding(
                        "warning",
                        "unresolved-related",
                        f"commit {record.hash} references invalid hash {ref.hash_ref!r}",
                        0,
                    )
                )
                continue
            try:
                linked = read_commit(ref.hash_ref, cwd=cwd)
            except RepoError as exc:
                findings.append(
                    Finding(
                        "warning",
                        "unresolved-related",
                        f"commit {record.hash} references {ref.hash_ref}: {exc}",
                        0,
                    )
                )
                continue
            if linked.hash in visited:
                continue
            visited.add(linked.hash)
            queue.append((linked, depth + 1))

    return ChainResult(tuple(atoms), tuple(findings))
