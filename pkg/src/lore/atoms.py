"""Parsing, serialization and linting of decision records in commit messages.

A lore-enriched commit message has three parts: an intent line (line 1), an
optional narrative body, and a final paragraph of ``Key: value`` trailers.
The trailer block is recognized with the same convention git itself uses:
it is the last blank-line-delimited paragraph, and every line in it must be
either a trailer line or an indented continuation of the previous trailer.
A message that is a single paragraph is never split.

Reserved trailer keys (matched case-insensitively, emitted in the canonical
capitalization below):

    Constraint      rules that shaped the decision
    Rejected        dismissed alternative, optionally ``| reason``
    Confidence      low | medium | high
    Scope-risk      narrow | moderate | wide
    Reversibility   clean | migration-needed | irreversible
    Directive       instructions for future modifiers
    Tested          what was verified, optional trailing ``(method)``
    Not-tested      what was not verified
    Related         related commit by hash (7-40 hex chars)

Unknown keys are preserved as extension trailers and carry no semantics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import DataError

CANONICAL_KEYS = (
    "Constraint",
    "Rejected",
    "Confidence",
    "Scope-risk",
    "Reversibility",
    "Directive",
    "Tested",
    "Not-tested",
    "Related",
)

# case-folded key -> canonical capitalization
RESERVED = {key.lower(): key for key in CANONICAL_KEYS}

KEY_TOKEN_RE = re.compile(r"^[A-Za-z][A-Za-z0-9-]*$")
TRAILER_LINE_RE = re.compile(r"^([A-Za-z][A-Za-z0-9-]*):[ \t](.*)$")
CONTINUATION_RE = re.compile(r"^[ \t]+\S")
HASH_REF_RE = re.compile(r"^[0-9a-fA-F]{7,40}$")

# Conventional-Commits style "type(scope): summary" prefix; a lore intent
# states why, not what, so such a prefix is a quality smell.
CONVENTIONAL_PREFIX_RE = re.compile(r"^[a-z][a-z0-9-]*(\([^()]*\))?!?: ")

INTENT_LENGTH_LIMIT = 200
WRAP_COLUMNS = 72
CONTINUATION_INDENT = "  "

_TEST_METHOD_RE = re.compile(r"^(?P<desc>.*\S)\s+\((?P<method>[^()]+)\)$")


class ConfidenceLevel(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class ScopeRisk(str, Enum):
    NARROW = "narrow"
    MODERATE = "moderate"
    WIDE = "wide"


class Reversibility(str, Enum):
    CLEAN = "clean"
    MIGRATION_NEEDED = "migration-needed"
    IRREVERSIBLE = "irreversible"


_ENUM_FOR_KEY = {
    "confidence": ConfidenceLevel,
    "scope-risk": ScopeRisk,
    "reversibility": Reversibility,
}


@dataclass(frozen=True)
class ConstraintEntry:
    text: str


@dataclass(frozen=True)
class RejectedEntry:
    alternative: str
    reason: str | None = None


@dataclass(frozen=True)
class DirectiveEntry:
    text: str


@dataclass(frozen=True)
class TestEntry:
    __test__ = False  # keep pytest from collecting this as a test class

    description: str
    method: str | None = None


@dataclass(frozen=True)
class RelatedRef:
    """Reference to a related commit.

    ``hash_ref`` holds the trimmed source text even when it is not valid
    hex, so that ``lint_atom`` can report it; use :attr:`is_valid` before
    trying to resolve it.
    """

    hash_ref: str

    @property
    def is_valid(self) -> bool:
        return bool(HASH_REF_RE.match(self.hash_ref))


@dataclass(frozen=True)
class ExtensionTrailer:
    key: str
    value: str


@dataclass(frozen=True)
class LoreAtom:
    """One commit's decision record.

    All collection fields preserve the order of appearance in the source
    message. Instances built by :func:`parse_message` always satisfy the
    serializer's invariants; hand-built instances are checked by
    :func:`serialize_atom`.
    """

    intent: str
    body: str = ""
    constraints: tuple[ConstraintEntry, ...] = ()
    rejected: tuple[RejectedEntry, ...] = ()
    confidence: ConfidenceLevel | None = None
    scope_risk: ScopeRisk | None = None
    reversibility: Reversibility | None = None
    directives: tuple[DirectiveEntry, ...] = ()
    tested: tuple[TestEntry, ...] = ()
    not_tested: tuple[TestEntry, ...] = ()
    related: tuple[RelatedRef, ...] = ()
    extensions: tuple[ExtensionTrailer, ...] = ()

    @property
    def has_reserved_trailers(self) -> bool:
        """True when at least one of the nine reserved trailers is present."""
        return bool(
            self.constraints
            or self.rejected
            or self.confidence is not None
            or self.scope_risk is not None
            or self.reversibility is not None
            or self.directives
            or self.tested
            or self.not_tested
            or self.related
        )

    @property
    def has_trailers(self) -> bool:
        return self.has_reserved_trailers or bool(self.extensions)


@dataclass(frozen=True)
class Finding:
    """A single parse or lint observation. ``line`` is 1-based; 0 means the
    finding applies to the message as a whole."""

    severity: str  # "error" | "warning"
    code: str
    message: str
    line: int = 0


@dataclass(frozen=True)
class ParseReport:
    """Result of parsing one commit message.

    ``atom`` is None exactly when at least one error-severity finding is
    present.
    """

    atom: LoreAtom | None
    findings: tuple[Finding, ...] = ()

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "warning")

    @property
    def ok(self) -> bool:
        return self.atom is not None


def _paragraphs(lines: list[str]) -> list[tuple[int, int]]:
    """Return (start, end) index pairs of blank-line-delimited paragraphs.

    A line is blank when it is empty after stripping whitespace.
    """
    spans = []
    start = None
    for i, line in enumerate(lines):
        if line.strip():
            if start is None:
                start = i
        else:
            if start is not None:
                spans.append((start, i))
                start = None
    if start is not None:
        spans.append((start, len(lines)))
    return spans


def _is_trailer_shaped(line: str) -> bool:
    return bool(TRAILER_LINE_RE.match(line))


def _is_continuation(line: str) -> bool:
    return bool(CONTINUATION_RE.match(line))


def _split(message: str) -> tuple[str, list[str], int]:
    """Split into (head, block_lines, block_start_line_index)."""
    lines = message.splitlines()
    spans = _paragraphs(lines)
    if len(spans) < 2:
        return message, [], -1
    start, end = spans[-1]
    block = lines[start:end]
    if all(_is_trailer_shaped(ln) or _is_continuation(ln) for ln in block) and any(
        _is_trailer_shaped(ln) for ln in block
    ):
        head = "\n".join(lines[:start]).rstrip("\n")
        return head, block, start
    return message, [], -1


def split_trailer_block(message: str) -> tuple[str, list[str]]:
    """Separate a message into its head and its trailer block, if any.

    The block is the final blank-line-delimited paragraph, accepted only
    when every one of its lines is either ``Key: value`` shaped or an
    indented continuation, and at least one line is an actual trailer
    (git applies the same minimum: an all-indented paragraph is prose).
    Otherwise ``block_lines`` is empty and ``head`` is the whole message.
    Total: never raises.
    """
    head, block, _ = _split(message)
    return head, block


def parse_rejected_value(value: str) -> RejectedEntry:
    """Split a Rejected value on its first ``|`` into alternative and reason.

    The reason is unset when there is no separator or the remainder is
    empty. Raises ValueError when the alternative side is empty.
    """
    idx = value.find("|")
    if idx < 0:
        alternative, reason = value.strip(), None
    else:
        alternative = value[:idx].strip()
        rest = value[idx + 1 :].strip()
        reason = rest or None
    if not alternative:
        raise ValueError("rejected entry has an empty alternative")
    return RejectedEntry(alternative, reason)


def parse_test_value(value: str) -> TestEntry:
    """Split a trailing parenthesized ``(method)`` token off a test claim."""
    m = _TEST_METHOD_RE.match(value)
    if m and m.group("method").strip():
        return TestEntry(m.group("desc"), m.group("method").strip())
    return TestEntry(value, None)


def _fold_trailers(
    block: list[str], block_start: int, findings: list[Finding]
) -> list[tuple[str, str, int]]:
    """Join continuation lines onto their trailers.

    Returns (raw_key, value, line_number) triples in source order. An
    indented line with no preceding trailer is dropped with a warning.
    """
    folded: list[tuple[str, str, int]] = []
    key, value, line_at = "", "", 0
    open_trailer = False
    for offset, line in enumerate(block):
        line_no = block_start + offset + 1
        m = TRAILER_LINE_RE.match(line)
        if m:
            if open_trailer:
                folded.append((key, value, line_at))
            key, value, line_at = m.group(1), m.group(2).strip(), line_no
            open_trailer = True
        elif not open_trailer:
            findings.append(
                Finding(
                    "warning",
                    "orphan-continuation",
                    "indented line has no preceding trailer to continue",
                    line_no,
                )
            )
        else:
            part = line.strip()
            value = f"{value} {part}" if value else part
    if open_trailer:
        folded.append((key, value, line_at))
    return folded


class _TrailerFold:
    """Accumulates typed entries while folding a trailer block."""

    def __init__(self):
        self.constraints: list[ConstraintEntry] = []
        self.rejected: list[RejectedEntry] = []
        self.scalars: dict[str, object] = {}
        self.directives: list[DirectiveEntry] = []
        self.tested: list[TestEntry] = []
        self.not_tested: list[TestEntry] = []
        self.related: list[RelatedRef] = []
        self.extensions: list[ExtensionTrailer] = []

    @property
    def survivors(self) -> int:
        return (
            len(self.constraints)
            + len(self.rejected)
            + len(self.scalars)
            + len(self.directives)
            + len(self.tested)
            + len(self.not_tested)
            + len(self.related)
            + len(self.extensions)
        )

    def add(self, raw_key: str, value: str, line_no: int, findings: list[Finding]):
        fold = raw_key.lower()
        if not value:
            findings.append(
                Finding(
                    "error",
                    "empty-trailer-value",
                    f"trailer '{raw_key}' has an empty value",
                    line_no,
                )
            )
            return
        if fold == "constraint":
            self.constraints.append(ConstraintEntry(value))
        elif fold == "rejected":
            try:
                self.rejected.append(parse_rejected_value(value))
            except ValueError:
                findings.append(
                    Finding(
                        "warning",
                        "rejected-empty-alternative",
                        f"rejected entry {value!r} has an empty alternative",
                        line_no,
                    )
                )
        elif fold in _ENUM_FOR_KEY:
            enum_cls = _ENUM_FOR_KEY[fold]
            try:
                parsed = enum_cls(value.lower())
            except ValueError:
                allowed = ", ".join(e.value for e in enum_cls)
                findings.append(
                    Finding(
                        "warning",
                        "invalid-enum",
                        f"'{RESERVED[fold]}' must be one of {allowed}, got {value!r}",
                        line_no,
                    )
                )
                return
            if fold in self.scalars:
                findings.append(
                    Finding(
                        "warning",
                        "duplicate-scalar",
                        f"'{RESERVED[fold]}' given more than once; keeping the last",
                        line_no,
                    )
                )
            self.scalars[fold] = parsed
        elif fold == "directive":
            self.directives.append(DirectiveEntry(value))
        elif fold == "tested":
            self.tested.append(parse_test_value(value))
        elif fold == "not-tested":
            self.not_tested.append(parse_test_value(value))
        elif fold == "related":
            self.related.append(RelatedRef(value))
        else:
            self.extensions.append(ExtensionTrailer(raw_key, value))


def _body_from(lines: list[str]) -> str:
    body_lines = list(lines)
    while body_lines and not body_lines[0].strip():
        body_lines.pop(0)
    while body_lines and not body_lines[-1].strip():
        body_lines.pop()
    return "\n".join(body_lines)


def parse_message(message: str) -> ParseReport:
    """Parse a full commit message into a :class:`ParseReport`.

    Never raises on string input; problems are reported as findings. The
    atom is withheld whenever an error-severity finding is present. A
    final paragraph whose trailers all get discarded (for example a lone
    invalid enum value) is kept as body text rather than silently lost.
    """
    findings: list[Finding] = []
    if not message.strip():
        findings.append(Finding("error", "empty-message", "message is empty", 0))
        return ParseReport(None, tuple(findings))

    all_lines = message.splitlines()
    intent = all_lines[0].strip() if all_lines else ""
    if not intent:
        findings.append(
            Finding("error", "empty-intent", "first message line is blank", 1)
        )
        return ParseReport(None, tuple(findings))
    if len(intent) > INTENT_LENGTH_LIMIT:
        findings.append(
            Finding(
                "warning",
                "long-intent",
                f"intent line exceeds {INTENT_LENGTH_LIMIT} characters",
                1,
            )
        )

    head, block, block_start = _split(message)
    fold = _TrailerFold()
    for raw_key, value, line_no in _fold_trailers(block, block_start, findings):
        fold.add(raw_key, value, line_no, findings)

    if any(f.severity == "error" for f in findings):
        return ParseReport(None, tuple(findings))

    if block and fold.survivors == 0:
        # every trailer was discarded with a warning; the paragraph is
        # body text for fidelity (the warnings above still tell the story)
        body = _body_from(all_lines[1:])
    elif block:
        body = _body_from(head.splitlines()[1:])
    else:
        findings.append(
            Finding("warning", "no-trailers", "message carries no trailer block", 0)
        )
        body = _body_from(all_lines[1:])

    atom = LoreAtom(
        intent=intent,
        body=body,
        constraints=tuple(fold.constraints),
        rejected=tuple(fold.rejected),
        confidence=fold.scalars.get("confidence"),
        scope_risk=fold.scalars.get("scope-risk"),
        reversibility=fold.scalars.get("reversibility"),
        directives=tuple(fold.directives),
        tested=tuple(fold.tested),
        not_tested=tuple(fold.not_tested),
        related=tuple(fold.related),
        extensions=tuple(fold.extensions),
    )
    return ParseReport(atom, tuple(findings))


def _check_value(problems: list[str], label: str, text: str, allow_pipe: bool = True):
    if not text or text != text.strip():
        problems.append(f"{label} must be non-empty and trimmed")
    if "\n" in text or "\r" in text:
        problems.append(f"{label} must not contain line breaks")
    if not allow_pipe and "|" in text:
        problems.append(f"{label} must not contain '|' (no escape syntax exists)")


def _invariant_problems(atom: LoreAtom) -> list[str]:
    problems: list[str] = []
    _check_value(problems, "intent", atom.intent)
    for i, c in enumerate(atom.constraints):
        _check_value(problems, f"constraints[{i}]", c.text)
    for i, r in enumerate(atom.rejected):
        _check_value(problems, f"rejected[{i}].alternative", r.alternative, allow_pipe=False)
        if r.reason is not None:
            _check_value(problems, f"rejected[{i}].reason", r.reason)
    for key, val in (
        ("confidence", atom.confidence),
        ("scope_risk", atom.scope_risk),
        ("reversibility", atom.reversibility),
    ):
        if val is not None and not isinstance(val, _ENUM_FOR_KEY[key.replace("_", "-")]):
            problems.append(f"{key} must be a typed enum value")
    for i, d in enumerate(atom.directives):
        _check_value(problems, f"directives[{i}]", d.text)
    for name, entries in (("tested", atom.tested), ("not_tested", atom.not_tested)):
        for i, t in enumerate(entries):
            _check_value(problems, f"{name}[{i}].description", t.description)
            if t.method is not None:
                _check_value(problems, f"{name}[{i}].method", t.method)
                if "(" in t.method or ")" in t.method:
                    problems.append(f"{name}[{i}].method must not contain parentheses")
    for i, r in enumerate(atom.related):
        _check_value(problems, f"related[{i}]", r.hash_ref)
    for i, e in enumerate(atom.extensions):
        if not KEY_TOKEN_RE.match(e.key):
            problems.append(f"extensions[{i}].key {e.key!r} is not a valid trailer key")
        elif e.key.lower() in RESERVED:
            problems.append(f"extensions[{i}].key {e.key!r} shadows a reserved trailer")
        _check_value(problems, f"extensions[{i}].value", e.value)
    if not atom.has_trailers and atom.body:
        claim = body_tail_claim(atom.body)
        multi_paragraph = len(_paragraphs(atom.body.splitlines())) > 1
        if claim in ("survives", "errors") and multi_paragraph:
            problems.append(
                "body ends with a trailer-formatted paragraph but the atom has "
                "no trailers; this cannot be serialized faithfully"
            )
    return problems


def body_tail_claim(body: str) -> str | None:
    """How a re-parse would treat the body's final paragraph.

    None: not claimable as a trailer block. "survives": it would be
    claimed and yield trailers. "drops": claimed but every trailer is
    discarded with a warning (the paragraph folds back into the body).
    "errors": claimed and parsing would fail.
    """
    lines = body.splitlines()
    spans = _paragraphs(lines)
    if not spans:
        return None
    start, end = spans[-1]
    para = lines[start:end]
    if not all(_is_trailer_shaped(ln) or _is_continuation(ln) for ln in para):
        return None
    if not any(_is_trailer_shaped(ln) for ln in para):
        return None
    scratch: list[Finding] = []
    fold = _TrailerFold()
    for raw_key, value, line_no in _fold_trailers(para, 0, scratch):
        fold.add(raw_key, value, line_no, scratch)
    if any(f.severity == "error" for f in scratch):
        return "errors"
    return "survives" if fold.survivors else "drops"


def _wrap_directive(text: str) -> list[str]:
    """Wrap a directive onto indented continuation lines at 72 columns.

    Breaks happen only at single-space positions between non-space
    characters, so rejoining the pieces with one space restores the text
    exactly. A segment with no usable break point is emitted overlong.
    """
    prefix = "Directive: "
    candidates = [
        i
        for i in range(1, len(text) - 1)
        if text[i] == " " and text[i - 1] != " " and text[i + 1] != " "
    ]
    lines: list[str] = []
    start = 0
    budget = WRAP_COLUMNS - len(prefix)
    while len(text) - start > budget:
        usable = [i for i in candidates if start < i <= start + budget]
        if not usable:
            later = [i for i in candidates if i > start]
            if not later:
                break
            usable = [later[0]]
        cut = usable[-1]
        lines.append(text[start:cut])
        start = cut + 1
        budget = WRAP_COLUMNS - len(CONTINUATION_INDENT)
    lines.append(text[start:])
    out = [prefix + lines[0]]
    out.extend(CONTINUATION_INDENT + seg for seg in lines[1:])
    return out


def serialize_atom(atom: LoreAtom) -> str:
    """Render an atom to its canonical commit-message text.

    Trailers are emitted in canonical order and capitalization; directive
    values longer than 72 columns wrap onto indented continuation lines.
    The output is byte-stable for equal atoms and re-parses to an equal
    atom. Raises DataError(invalid-atom) when the atom violates its
    invariants.
    """
    problems = _invariant_problems(atom)
    if problems:
        raise DataError("invalid-atom", "; ".join(problems))

    trailers: list[str] = []
    for c in atom.constraints:
        trailers.append(f"Constraint: {c.text}")
    for r in atom.rejected:
        if r.reason is not None:
            trailers.append(f"Rejected: {r.alternative} | {r.reason}")
        else:
            trailers.append(f"Rejected: {r.alternative}")
    if atom.confidence is not None:
        trailers.append(f"Confidence: {atom.confidence.value}")
    if atom.scope_risk is not None:
        trailers.append(f"Scope-risk: {atom.scope_risk.value}")
    if atom.reversibility is not None:
        trailers.append(f"Reversibility: {atom.reversibility.value}")
    for d in atom.directives:
        trailers.extend(_wrap_directive(d.text))
    for t in atom.tested:
        suffix = f" ({t.method})" if t.method is not None else ""
        trailers.append(f"Tested: {t.description}{suffix}")
    for t in atom.not_tested:
        suffix = f" ({t.method})" if t.method is not None else ""
        trailers.append(f"Not-tested: {t.description}{suffix}")
    for r in atom.related:
        trailers.append(f"Related: {r.hash_ref}")
    for e in atom.extensions:
        trailers.append(f"{e.key}: {e.value}")

    parts = [atom.intent]
    if atom.body:
        # A trailer-formatted body paragraph with no actual trailers only
        # occurs for single-paragraph sources; keep the body attached to
        # the intent line so re-parsing does not claim it as a block.
        if not trailers and body_tail_claim(atom.body) in ("survives", "errors"):
            parts.append(atom.body)
        else:
            parts.extend(["", atom.body])
    if trailers:
        parts.extend(["", "\n".join(trailers)])
    return "\n".join(parts) + "\n"


def lint_atom(atom: LoreAtom, report: ParseReport) -> list[Finding]:
    """Quality checks beyond format validity.

    Returns additional findings; does not modify the report. Findings
    without a determinable source line carry line 0.
    """
    findings: list[Finding] = []
    if CONVENTIONAL_PREFIX_RE.match(atom.intent):
        findings.append(
            Finding(
                "warning",
                "intent-is-diff-summary",
                "intent line looks like a type(scope): diff summary; state why, not what",
                1,
            )
        )
    for r in atom.rejected:
        if r.reason is None:
            findings.append(
                Finding(
                    "warning",
                    "rejected-missing-reason",
                    f"rejected alternative {r.alternative!r} records no reason",
                    0,
                )
            )
    for ref in atom.related:
        if not ref.is_valid:
            findings.append(
                Finding(
                    "error",
                    "related-bad-hash",
                    f"related reference {ref.hash_ref!r} is not a 7-40 char hex hash",
                    0,
                )
            )
    for label, texts in (
        ("Constraint", [c.text for c in atom.constraints]),
        ("Directive", [d.text for d in atom.directives]),
        ("Tested", [t.description for t in atom.tested]),
        ("Not-tested", [t.description for t in atom.not_tested]),
    ):
        for text in texts:
            if not text.strip():
                findings.append(
                    Finding(
                        "error",
                        "empty-trailer-value",
                        f"{label} trailer has an empty value",
                        0,
                    )
                )
    return findings
