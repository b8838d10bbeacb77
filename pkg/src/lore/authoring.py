"""Building lore commits and checking recent history for conformance.

Two authoring routes produce the same :class:`AtomDraft`: an interactive
prompt flow for humans and a strict JSON document for agents and scripts.
The JSON route rejects unknown keys outright; silently dropping a
misspelled field would silently destroy knowledge.

Structured input schema (all fields optional except ``intent``):

    {
      "lore": 1,
      "intent": "why the change was made",
      "body": "narrative context",
      "constraints": ["..."],
      "rejected": [{"alternative": "...", "reason": "..."}],
      "confidence": "low" | "medium" | "high",
      "scope_risk": "narrow" | "moderate" | "wide",
      "reversibility": "clean" | "migration-needed" | "irreversible",
      "directives": ["..."],
      "tested": ["claim (method)"],
      "not_tested": ["claim"],
      "related": ["abc1234"],
      "extensions": [{"key": "Ticket", "value": "X-1"}]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Protocol

from .atoms import (
    HASH_REF_RE,
    KEY_TOKEN_RE,
    RESERVED,
    body_tail_claim,
    ConfidenceLevel,
    ConstraintEntry,
    DirectiveEntry,
    ExtensionTrailer,
    Finding,
    LoreAtom,
    RejectedEntry,
    RelatedRef,
    Reversibility,
    ScopeRisk,
    TestEntry,
    lint_atom,
    parse_message,
    parse_rejected_value,
    parse_test_value,
    serialize_atom,
)
from .errors import AbortedError, DataError
from .repo import HistoryQuery, list_commits

SCHEMA_VERSION = 1

_TOP_LEVEL_KEYS = frozenset(
    {
        "lore",
        "intent",
        "body",
        "constraints",
        "rejected",
        "confidence",
        "scope_risk",
        "reversibility",
        "directives",
        "tested",
        "not_tested",
        "related",
        "extensions",
    }
)

_ENUMS = {
    "confidence": ConfidenceLevel,
    "scope_risk": ScopeRisk,
    "reversibility": Reversibility,
}


@dataclass
class AtomDraft:
    """A lore atom under construction; becomes a LoreAtom via to_atom()."""

    intent: str
    body: str = ""
    constraints: list[ConstraintEntry] = dc_field(default_factory=list)
    rejected: list[RejectedEntry] = dc_field(default_factory=list)
    confidence: ConfidenceLevel | None = None
    scope_risk: ScopeRisk | None = None
    reversibility: Reversibility | None = None
    directives: list[DirectiveEntry] = dc_field(default_factory=list)
    tested: list[TestEntry] = dc_field(default_factory=list)
    not_tested: list[TestEntry] = dc_field(default_factory=list)
    related: list[RelatedRef] = dc_field(default_factory=list)
    extensions: list[ExtensionTrailer] = dc_field(default_factory=list)

    def to_atom(self) -> LoreAtom:
        return LoreAtom(
            intent=self.intent,
            body=self.body,
            constraints=tuple(self.constraints),
            rejected=tuple(self.rejected),
            confidence=self.confidence,
            scope_risk=self.scope_risk,
            reversibility=self.reversibility,
            directives=tuple(self.directives),
            tested=tuple(self.tested),
            not_tested=tuple(self.not_tested),
            related=tuple(self.related),
            extensions=tuple(self.extensions),
        )

    def to_message(self) -> str:
        return serialize_atom(self.to_atom())


class _Violations:
    def __init__(self):
        self.items: list[str] = []

    def add(self, path: str, problem: str):
        self.items.append(f"{path}: {problem}")

    def raise_if_any(self):
        if self.items:
            raise DataError("schema-violation", "; ".join(self.items))


def _clean_line(v: _Violations, path: str, value: object, allow_pipe: bool = True) -> str:
    if not isinstance(value, str):
        v.add(path, f"expected a string, got {type(value).__name__}")
        return ""
    text = value.strip()
    if not text:
        v.add(path, "must be a non-empty string")
    if "\n" in value or "\r" in value:
        v.add(path, "must not contain line breaks")
    if not allow_pipe and "|" in value:
        v.add(path, "must not contain '|' (no escape syntax exists)")
    return text


def _expect_list(v: _Violations, path: str, value: object) -> list:
    if not isinstance(value, list):
        v.add(path, f"expected an array, got {type(value).__name__}")
        return []
    return value


def build_from_structured(doc: str) -> AtomDraft:
    """Build a draft from a JSON document, strictly.

    Raises DataError(bad-json) for malformed JSON and
    DataError(schema-violation) naming every offending path (``$.field``
    notation) for anything that fails the schema.
    """
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise DataError("bad-json", f"invalid JSON: {exc}") from None

    if not isinstance(data, dict):
        raise DataError("schema-violation", "$: expected a JSON object")

    v = _Violations()
    for key in data:
        if key not in _TOP_LEVEL_KEYS:
            v.add(f"$.{key}", "unknown key")

    if "lore" in data and data["lore"] != SCHEMA_VERSION:
        v.add("$.lore", f"unsupported schema version {data['lore']!r} (expected 1)")

    if "intent" not in data:
        v.add("$.intent", "required field is missing")
        intent = ""
    else:
        intent = _clean_line(v, "$.intent", data["intent"])

    body = ""
    if "body" in data:
        if not isinstance(data["body"], str):
            v.add("$.body", f"expected a string, got {type(data['body']).__name__}")
        else:
            body_lines = data["body"].splitlines()
            while body_lines and not body_lines[0].strip():
                body_lines.pop(0)
            while body_lines and not body_lines[-1].strip():
                body_lines.pop()
            body = "\n".join(body_lines)
            if body_tail_claim(body) is not None:
                v.add(
                    "$.body",
                    "must not end with a trailer-formatted paragraph; "
                    "use the typed fields instead",
                )
                body = ""

    draft = AtomDraft(intent=intent, body=body)

    for text_field, target in (
        ("constraints", draft.constraints),
        ("directives", draft.directives),
    ):
        for i, item in enumerate(_expect_list(v, f"$.{text_field}", data.get(text_field, []))):
            text = _clean_line(v, f"$.{text_field}[{i}]", item)
            if text:
                entry = ConstraintEntry(text) if text_field == "constraints" else DirectiveEntry(text)
                target.append(entry)

    for i, item in enumerate(_expect_list(v, "$.rejected", data.get("rejected", []))):
        path = f"$.rejected[{i}]"
        if not isinstance(item, dict):
            v.add(path, f"expected an object, got {type(item).__name__}")
            continue
        for key in item:
            if key not in ("alternative", "reason"):
                v.add(f"{path}.{key}", "unknown key")
        if "alternative" not in item:
            v.add(f"{path}.alternative", "required field is missing")
            continue
        alternative = _clean_line(v, f"{path}.alternative", item["alternative"], allow_pipe=False)
        reason = None
        if item.get("reason") is not None:
            reason = _clean_line(v, f"{path}.reason", item["reason"])
        if alternative:
            draft.rejected.append(RejectedEntry(alternative, reason or None))

    for name, enum_cls in _ENUMS.items():
        if data.get(name) is None:
            continue
        raw = data[name]
        try:
            parsed = enum_cls(raw)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            v.add(f"$.{name}", f"must be one of {allowed}, got {raw!r}")
            continue
        setattr(draft, name, parsed)

    for name, target in (("tested", draft.tested), ("not_tested", draft.not_tested)):
        for i, item in enumerate(_expect_list(v, f"$.{name}", data.get(name, []))):
            text = _clean_line(v, f"$.{name}[{i}]", item)
            if text:
                target.append(parse_test_value(text))

    for i, item in enumerate(_expect_list(v, "$.related", data.get("related", []))):
        text = _clean_line(v, f"$.related[{i}]", item)
        if text and not HASH_REF_RE.match(text):
            v.add(f"$.related[{i}]", f"{text!r} is not a 7-40 char hex hash")
        elif text:
            draft.related.append(RelatedRef(text))

    for i, item in enumerate(_expect_list(v, "$.extensions", data.get("extensions", []))):
        path = f"$.extensions[{i}]"
        if not isinstance(item, dict):
            v.add(path, f"expected an object, got {type(item).__name__}")
            continue
        for key in item:
            if key not in ("key", "value"):
                v.add(f"{path}.{key}", "unknown key")
        if "key" not in item or "value" not in item:
            v.add(path, "requires both 'key' and 'value'")
            continue
        key_text = _clean_line(v, f"{path}.key", item["key"])
        value_text = _clean_line(v, f"{path}.value", item["value"])
        if key_text and not KEY_TOKEN_RE.match(key_text):
            v.add(f"{path}.key", f"{key_text!r} is not a valid trailer key")
        elif key_text and key_text.lower() in RESERVED:
            v.add(f"{path}.key", f"{key_text!r} is a reserved trailer key")
        elif key_text and value_text:
            draft.extensions.append(ExtensionTrailer(key_text, value_text))

    v.raise_if_any()
    return draft


def render_structured(atom: LoreAtom) -> str:
    """Inverse of build_from_structured: a JSON document for an atom.

    Empty fields are omitted; feeding the result back through
    build_from_structured reconstructs an equal atom.
    """
    doc: dict = {"lore": SCHEMA_VERSION, "intent": atom.intent}
    if atom.body:
        doc["body"] = atom.body
    if atom.constraints:
        doc["constraints"] = [c.text for c in atom.constraints]
    if atom.rejected:
        doc["rejected"] = [
            {"alternative": r.alternative, **({"reason": r.reason} if r.reason else {})}
            for r in atom.rejected
        ]
    for name in ("confidence", "scope_risk", "reversibility"):
        value = getattr(atom, name)
        if value is not None:
            doc[name] = value.value
    if atom.directives:
        doc["directives"] = [d.text for d in atom.directives]

    def test_string(entry: TestEntry) -> str:
        return f"{entry.description} ({entry.method})" if entry.method else entry.description

    if atom.tested:
        doc["tested"] = [test_string(t) for t in atom.tested]
    if atom.not_tested:
        doc["not_tested"] = [test_string(t) for t in atom.not_tested]
    if atom.related:
        doc["related"] = [r.hash_ref for r in atom.related]
    if atom.extensions:
        doc["extensions"] = [{"key": e.key, "value": e.value} for e in atom.extensions]
    return json.dumps(doc, ensure_ascii=False, indent=2)


class PromptIO(Protocol):
    """Question/answer channel for the interactive builder."""

    def ask(self, prompt: str) -> str:
        """Return the user's answer; raise AbortedError on cancel."""
        ...

    def show(self, text: str) -> None:
        ...


class ScriptedPromptIO:
    """Canned answers for tests and scripting; aborts when they run out."""

    def __init__(self, answers: list[str]):
        self.answers = list(answers)
        self.transcript: list[str] = []

    def ask(self, prompt: str) -> str:
        self.transcript.append(prompt)
        if not self.answers:
            raise AbortedError("scripted answers exhausted")
        return self.answers.pop(0)

    def show(self, text: str) -> None:
        self.transcript.append(text)


def _ask_repeating(io: PromptIO, prompt: str, accept) -> None:
    """Keep asking until a blank answer; ``accept`` may raise ValueError
    to reject an answer with a message."""
    while True:
        answer = io.ask(prompt).strip()
        if not answer:
            return
        try:
            accept(answer)
        except ValueError as exc:
            io.show(f"  ! {exc}")


def _ask_enum(io: PromptIO, label: str, enum_cls):
    allowed = "/".join(e.value for e in enum_cls)
    while True:
        answer = io.ask(f"{label} [{allowed}] (blank to skip): ").strip()
        if not answer:
            return None
        try:
            return enum_cls(answer.lower())
        except ValueError:
            io.show(f"  ! expected one of: {allowed}")


def build_interactive(prompt_io: PromptIO) -> AtomDraft:
    """Walk the canonical trailer order, one question per field.

    Blank answers skip optional fields; repeatable fields loop until a
    blank line. The final confirmation shows the exact message; declining
    it aborts with no side effects.
    """
    io = prompt_io

    intent = ""
    while not intent:
        intent = io.ask("Intent -- why is this change being made? ").strip()
        if not intent:
            io.show("  ! an intent line is required")
    draft = AtomDraft(intent=intent)

    io.show("Body -- narrative context, finish with an empty line:")
    body_lines: list[str] = []
    while True:
        line = io.ask("| ")
        if not line.strip():
            break
        body_lines.append(line.rstrip())
    draft.body = "\n".join(body_lines)

    _ask_repeating(
        io,
        "Constraint (blank to finish): ",
        lambda text: draft.constraints.append(ConstraintEntry(text)),
    )

    def accept_rejected(text: str):
        try:
            entry = parse_rejected_value(text)
        except ValueError as exc:
            raise ValueError(str(exc)) from None
        if "|" in entry.alternative:
            raise ValueError("alternative must not contain '|'")
        draft.rejected.append(entry)

    _ask_repeating(io, "Rejected alternative ('option | reason'; blank to finish): ", accept_rejected)

    draft.confidence = _ask_enum(io, "Confidence", ConfidenceLevel)
    draft.scope_risk = _ask_enum(io, "Scope-risk", ScopeRisk)
    draft.reversibility = _ask_enum(io, "Reversibility", Reversibility)

    _ask_repeating(
        io,
        "Directive for future modifiers (blank to finish): ",
        lambda text: draft.directives.append(DirectiveEntry(text)),
    )
    _ask_repeating(
        io,
        "Tested claim, optionally ending '(method)' (blank to finish): ",
        lambda text: draft.tested.append(parse_test_value(text)),
    )
    _ask_repeating(
        io,
        "Not-tested claim (blank to finish): ",
        lambda text: draft.not_tested.append(parse_test_value(text)),
    )

    def accept_related(text: str):
        if not HASH_REF_RE.match(text):
            raise ValueError("expected a 7-40 char hex commit hash")
        draft.related.append(RelatedRef(text))

    _ask_repeating(io, "Related commit hash (blank to finish): ", accept_related)

    def accept_extension(text: str):
        key, sep, value = text.partition(":")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ValueError("expected 'Key: value'")
        if not KEY_TOKEN_RE.match(key):
            raise ValueError(f"{key!r} is not a valid trailer key")
        if key.lower() in RESERVED:
            raise ValueError(f"{key!r} is reserved; it was asked for above")
        draft.extensions.append(ExtensionTrailer(key, value))

    _ask_repeating(io, "Extra trailer 'Key: value' (blank to finish): ", accept_extension)

    message = draft.to_message()
    io.show("")
    io.show(message)
    answer = io.ask("Commit this message? [y/N] ").strip().lower()
    if answer not in ("y", "yes"):
        raise AbortedError("commit builder cancelled at confirmation")
    return draft


@dataclass(frozen=True)
class CommitFindings:
    hash: str
    findings: tuple[Finding, ...]


@dataclass(frozen=True)
class ValidationReport:
    per_commit: tuple[CommitFindings, ...]
    totals: dict[str, int]
    threshold: str  # "error" | "warning"

    @property
    def passed(self) -> bool:
        failing = self.totals.get("error", 0)
        if self.threshold == "warning":
            failing += self.totals.get("warning", 0)
        return failing == 0


def _atom_has_key(atom: LoreAtom, canonical_key: str) -> bool:
    by_key = {
        "Constraint": bool(atom.constraints),
        "Rejected": bool(atom.rejected),
        "Confidence": atom.confidence is not None,
        "Scope-risk": atom.scope_risk is not None,
        "Reversibility": atom.reversibility is not None,
        "Directive": bool(atom.directives),
        "Tested": bool(atom.tested),
        "Not-tested": bool(atom.not_tested),
        "Related": bool(atom.related),
    }
    if canonical_key in by_key:
        return by_key[canonical_key]
    fold = canonical_key.lower()
    return any(e.key.lower() == fold for e in atom.extensions)


def validate(
    rev_range: str | None = None,
    last_n: int | None = None,
    threshold: str = "error",
    *,
    required_trailers: tuple[str, ...] = (),
    include_merges: bool = False,
    cwd=None,
) -> ValidationReport:
    """Parse and lint each commit in a range (default: the last 20).

    Merge commits are skipped unless included. ``threshold="warning"``
    makes warnings failing too (the --strict mode).
    """
    if threshold not in ("error", "warning"):
        raise ValueError("threshold must be 'error' or 'warning'")
    query = HistoryQuery(
        rev_range=rev_range,
        max_count=None if rev_range is not None else (last_n or 20),
        include_merges=include_merges,
    )
    records = list_commits(query, cwd=cwd)

    per_commit: list[CommitFindings] = []
    totals = {"error": 0, "warning": 0}
    for record in records:
        report = parse_message(record.message)
        findings = list(report.findings)
        if report.atom is not None:
            findings.extend(lint_atom(report.atom, report))
            for key in required_trailers:
                if not _atom_has_key(report.atom, key):
                    findings.append(
                        Finding(
                            "warning",
                            "missing-required-trailer",
                            f"required trailer '{key}' is absent",
                            0,
                        )
                    )
        for finding in findings:
            totals[finding.severity] = totals.get(finding.severity, 0) + 1
        per_commit.append(CommitFindings(record.hash, tuple(findings)))
    return ValidationReport(tuple(per_commit), totals, threshold)
