"""Human and machine renderers for query and validation results.

Both renderers present the same entries in the same order; only the
formatting differs. JSON output is byte-deterministic for a fixed result
(compact separators, fixed key order, ISO-8601 UTC timestamps, full
hashes) and carries a ``"lore_output": 1`` version marker. Human output
abbreviates hashes to 12 characters and shows absolute plus relative
dates.
"""

from __future__ import annotations

import json
import time
from datetime import datetime, timezone

from .authoring import ValidationReport
from .queries import (
    AttributedAtom,
    ConstraintSet,
    ContextSummary,
    CoverageMap,
    DirectiveList,
    RejectedLedger,
    StaleReport,
)

OUTPUT_VERSION = 1
ABBREV = 12


def iso_utc(epoch_seconds: int) -> str:
    return datetime.fromtimestamp(epoch_seconds, tz=timezone.utc).isoformat()


def relative_date(epoch_seconds: int, now: int | None = None) -> str:
    now = int(time.time()) if now is None else now
    days = max(0, (now - epoch_seconds) // 86400)
    if days == 0:
        return "today"
    if days == 1:
        return "1 day ago"
    if days < 60:
        return f"{days} days ago"
    if days < 730:
        return f"{days // 30} months ago"
    return f"{days // 365} years ago"


def _atom_dict(att: AttributedAtom) -> dict:
    atom = att.atom
    return {
        "commit": {
            "hash": att.commit.hash,
            "author_name": att.commit.author_name,
            "author_email": att.commit.author_email,
            "author_date": iso_utc(att.commit.author_date),
        },
        "atom": {
            "intent": atom.intent,
            "body": atom.body,
            "constraints": [c.text for c in atom.constraints],
            "rejected": [
                {"alternative": r.alternative, "reason": r.reason} for r in atom.rejected
            ],
            "confidence": atom.confidence.value if atom.confidence else None,
            "scope_risk": atom.scope_risk.value if atom.scope_risk else None,
            "reversibility": atom.reversibility.value if atom.reversibility else None,
            "directives": [d.text for d in atom.directives],
            "tested": [
                {"description": t.description, "method": t.method} for t in atom.tested
            ],
            "not_tested": [
                {"description": t.description, "method": t.method}
                for t in atom.not_tested
            ],
            "related": [r.hash_ref for r in atom.related],
            "extensions": [{"key": e.key, "value": e.value} for e in atom.extensions],
        },
    }


def _payload(result) -> dict:
    if isinstance(result, ContextSummary):
        payload = {
            "path": result.path,
            "non_lore_commits": result.non_lore_commits,
            "counts": {k: result.counts[k] for k in sorted(result.counts)},
            "atoms": [_atom_dict(a) for a in result.atoms],
        }
        if result.related:
            payload["related"] = [_atom_dict(a) for a in result.related]
        return payload
    if isinstance(result, ConstraintSet):
        return {
            "constraints": [
                {
                    "text": e.text,
                    "source_hash": e.source_hash,
                    "author_date": iso_utc(e.author_date),
                    "stale": e.stale,
                }
                for e in result.entries
            ]
        }
    if isinstance(result, RejectedLedger):
        return {
            "rejected": [
                {
                    "alternative": e.alternative,
                    "reason": e.reason,
                    "source_hash": e.source_hash,
                    "author_date": iso_utc(e.author_date),
                }
                for e in result.entries
            ]
        }
    if isinstance(result, DirectiveList):
        return {
            "directives": [
                {
                    "text": e.text,
                    "source_hash": e.source_hash,
                    "author_date": iso_utc(e.author_date),
                }
                for e in result.entries
            ]
        }
    if isinstance(result, CoverageMap):
        return {
            "tested": [
                {
                    "description": e.description,
                    "method": e.method,
                    "source_hash": e.source_hash,
                    "author_date": iso_utc(e.author_date),
                }
                for e in result.tested
            ],
            "not_tested": [
                {
                    "description": e.description,
                    "source_hash": e.source_hash,
                    "author_date": iso_utc(e.author_date),
                }
                for e in result.not_tested
            ],
        }
    if isinstance(result, StaleReport):
        return {
            "stale": [
                {
                    "kind": e.kind,
                    "text": e.text,
                    "source_hash": e.source_hash,
                    "author_date": iso_utc(e.author_date),
                    "rule": e.rule,
                    "later_touch_count": e.later_touch_count,
                    "paths": list(e.paths),
                }
                for e in result.entries
            ]
        }
    if isinstance(result, ValidationReport):
        return {
            "commits": [
                {
                    "hash": c.hash,
                    "findings": [
                        {
                            "severity": f.severity,
                            "code": f.code,
                            "message": f.message,
                            "line": f.line,
                        }
                        for f in c.findings
                    ],
                }
                for c in result.per_commit
            ],
            "totals": {
                "error": result.totals.get("error", 0),
                "warning": result.totals.get("warning", 0),
            },
            "threshold": result.threshold,
            "passed": result.passed,
        }
    if isinstance(result, dict):
        return result
    raise TypeError(f"no JSON renderer for {type(result).__name__}")


def render_json(result) -> str:
    """Byte-deterministic JSON for any query or validation result."""
    payload = {"lore_output": OUTPUT_VERSION}
    payload.update(_payload(result))
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def _stamp(source_hash: str, author_date: int, now: int | None) -> str:
    return (
        f"{source_hash[:ABBREV]}  {iso_utc(author_date)}"
        f" ({relative_date(author_date, now)})"
    )


def _entry_lines(title_text: str, source_hash: str, author_date: int, now: int | None) -> list[str]:
    return [f"  {title_text}", f"      from {_stamp(source_hash, author_date, now)}"]


def render_human(result, path: str | None = None, now: int | None = None) -> str:
    """Readable rendering; same entries and order as render_json."""
    where = f" for {path}" if path else ""
    lines: list[str] = []

    if isinstance(result, ContextSummary):
        if not result.atoms and not result.non_lore_commits:
            return f"no history recorded for {result.path}"
        counts = ", ".join(f"{k}={v}" for k, v in sorted(result.counts.items()))
        lines.append(
            f"lore context for {result.path}: {len(result.atoms)} lore commit(s), "
            f"{result.non_lore_commits} without lore"
        )
        if counts:
            lines.append(f"totals: {counts}")
        for att in result.atoms:
            lines.append("")
            lines.append(f"{_stamp(att.commit.hash, att.commit.author_date, now)}  {att.commit.author_name}")
            lines.append(f"  {att.atom.intent}")
            for c in att.atom.constraints:
                lines.append(f"    Constraint: {c.text}")
            for r in att.atom.rejected:
                suffix = f" | {r.reason}" if r.reason else ""
                lines.append(f"    Rejected: {r.alternative}{suffix}")
            for label, value in (
                ("Confidence", att.atom.confidence),
                ("Scope-risk", att.atom.scope_risk),
                ("Reversibility", att.atom.reversibility),
            ):
                if value is not None:
                    lines.append(f"    {label}: {value.value}")
            for d in att.atom.directives:
                lines.append(f"    Directive: {d.text}")
            for t in att.atom.tested:
                method = f" ({t.method})" if t.method else ""
                lines.append(f"    Tested: {t.description}{method}")
            for t in att.atom.not_tested:
                method = f" ({t.method})" if t.method else ""
                lines.append(f"    Not-tested: {t.description}{method}")
            for r in att.atom.related:
                lines.append(f"    Related: {r.hash_ref}")
            for e in att.atom.extensions:
                lines.append(f"    {e.key}: {e.value}")
        if result.related:
            lines.append("")
            lines.append("linked via Related:")
            for att in result.related:
                lines.append(
                    f"  {_stamp(att.commit.hash, att.commit.author_date, now)}  {att.atom.intent}"
                )
        return "\n".join(lines)

    if isinstance(result, ConstraintSet):
        if not result.entries:
            return f"no constraints recorded{where}"
        lines.append(f"constraints{where}:")
        for e in result.entries:
            marker = " [stale?]" if e.stale else ""
            lines.extend(_entry_lines(f"{e.text}{marker}", e.source_hash, e.author_date, now))
        return "\n".join(lines)

    if isinstance(result, RejectedLedger):
        if not result.entries:
            return f"no rejected alternatives recorded{where}"
        lines.append(f"rejected alternatives{where}:")
        for e in result.entries:
            suffix = f" | {e.reason}" if e.reason else ""
            lines.extend(_entry_lines(f"{e.alternative}{suffix}", e.source_hash, e.author_date, now))
        return "\n".join(lines)

    if isinstance(result, DirectiveList):
        if not result.entries:
            return f"no directives recorded{where}"
        lines.append(f"directives{where}:")
        for e in result.entries:
            lines.extend(_entry_lines(e.text, e.source_hash, e.author_date, now))
        return "\n".join(lines)

    if isinstance(result, CoverageMap):
        if not result.tested and not result.not_tested:
            return f"no test claims recorded{where}"
        lines.append(f"test coverage claims{where}:")
        if result.tested:
            lines.append("tested:")
            for e in result.tested:
                method = f" ({e.method})" if e.method else ""
                lines.extend(_entry_lines(f"{e.description}{method}", e.source_hash, e.author_date, now))
        if result.not_tested:
            lines.append("not tested:")
            for e in result.not_tested:
                lines.extend(_entry_lines(e.description, e.source_hash, e.author_date, now))
        return "\n".join(lines)

    if isinstance(result, StaleReport):
        if not result.entries:
            return f"nothing looks stale{where}"
        lines.append(f"possibly stale entries{where}:")
        group: tuple[str, ...] | None = None
        for e in result.entries:
            if e.paths != group:
                group = e.paths
                lines.append(f"{', '.join(e.paths)}:")
            lines.append(f"  [{e.kind}] {e.text}")
            lines.append(
                f"      from {_stamp(e.source_hash, e.author_date, now)}; "
                f"{e.later_touch_count} later commit(s) touched this path "
                f"(rule: {e.rule})"
            )
        return "\n".join(lines)

    if isinstance(result, ValidationReport):
        for c in result.per_commit:
            if not c.findings:
                lines.append(f"{c.hash[:ABBREV]}  ok")
                continue
            lines.append(f"{c.hash[:ABBREV]}")
            for f in c.findings:
                at = f" (line {f.line})" if f.line else ""
                lines.append(f"  {f.severity}: {f.code}: {f.message}{at}")
        lines.append(
            f"checked {len(result.per_commit)} commit(s): "
            f"{result.totals.get('error', 0)} error(s), "
            f"{result.totals.get('warning', 0)} warning(s)"
        )
        lines.append("result: " + ("pass" if result.passed else "fail"))
        return "\n".join(lines)

    if isinstance(result, dict):
        return "\n".join(f"{k}: {v}" for k, v in result.items())
    raise TypeError(f"no human renderer for {type(result).__name__}")
