"""Format layer: parsing, serialization, linting."""

from __future__ import annotations

import pytest

from lore.atoms import (
    ConfidenceLevel,
    ConstraintEntry,
    DirectiveEntry,
    ExtensionTrailer,
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
    split_trailer_block,
)
from lore.errors import DataError

from oracles import block_oracle


class TestParseFig1:
    def test_fields(self, fig1_message):
        report = parse_message(fig1_message)
        assert report.errors == ()
        assert report.warnings == ()
        atom = report.atom
        assert atom.intent == "Prevent silent session drops during long-running operations"
        assert [c.text for c in atom.constraints] == [
            "Auth service does not support token introspection",
            "Must not add latency to non-expired-token paths",
        ]
        assert atom.rejected == (
            RejectedEntry("Extend token TTL to 24h", "security policy violation"),
            RejectedEntry("Background refresh on timer", "race condition"),
        )
        assert atom.confidence is ConfidenceLevel.HIGH
        assert atom.scope_risk is ScopeRisk.NARROW
        assert atom.reversibility is Reversibility.CLEAN
        assert atom.directives == (
            DirectiveEntry(
                "Error handling is intentionally broad (all 4xx)"
                " -- do not narrow without verifying upstream behavior"
            ),
        )
        assert atom.tested == (TestEntry("Single expired token refresh", "unit"),)
        assert atom.not_tested == (
            TestEntry("Auth service cold-start > 500ms behavior", None),
        )
        assert atom.extensions == ()

    def test_body(self, fig1_message):
        atom = parse_message(fig1_message).atom
        assert atom.body == (
            "The auth service returns inconsistent status codes on token\n"
            "expiry, so the interceptor catches all 4xx responses and\n"
            "triggers an inline refresh."
        )

    def test_lint_clean(self, fig1_message):
        report = parse_message(fig1_message)
        assert lint_atom(report.atom, report) == []


class TestParseEdges:
    def test_plain_message_warns_no_trailers(self):
        report = parse_message("fix typo\n")
        assert report.atom is not None
        assert report.atom.intent == "fix typo"
        assert report.atom.body == ""
        assert not report.atom.has_trailers
        assert [f.code for f in report.warnings] == ["no-trailers"]

    def test_empty_message(self):
        report = parse_message("")
        assert report.atom is None
        assert [f.code for f in report.errors] == ["empty-message"]

    def test_whitespace_only_message(self):
        report = parse_message("  \n \t \n")
        assert report.atom is None
        assert [f.code for f in report.errors] == ["empty-message"]

    def test_blank_first_line_is_error(self):
        report = parse_message("\nreal text\n")
        assert report.atom is None
        assert [f.code for f in report.errors] == ["empty-intent"]

    def test_unknown_key_goes_to_extensions(self):
        report = parse_message("subject\n\nConstraint: A\nTicket: X-1\n")
        atom = report.atom
        assert [c.text for c in atom.constraints] == ["A"]
        assert atom.extensions == (ExtensionTrailer("Ticket", "X-1"),)
        assert report.errors == ()

    def test_keys_are_case_insensitive(self):
        msg = "subject\n\nconstraint: a\nCONSTRAINT: b\nConstraint: c\n"
        atom = parse_message(msg).atom
        assert [c.text for c in atom.constraints] == ["a", "b", "c"]

    def test_long_intent_warns(self):
        report = parse_message("x" * 201 + "\n\nConstraint: A\n")
        assert [f.code for f in report.warnings] == ["long-intent"]
        assert report.atom is not None

    def test_invalid_enum_warns_and_leaves_unset(self):
        report = parse_message("subject\n\nConfidence: maybe\n")
        assert report.atom is not None
        assert report.atom.confidence is None
        assert [f.code for f in report.warnings] == ["invalid-enum"]

    def test_enum_value_case_folded(self):
        atom = parse_message("subject\n\nConfidence: High\n").atom
        assert atom.confidence is ConfidenceLevel.HIGH

    def test_duplicate_scalar_keeps_last(self):
        report = parse_message("subject\n\nConfidence: low\nConfidence: high\n")
        assert report.atom.confidence is ConfidenceLevel.HIGH
        assert [f.code for f in report.warnings] == ["duplicate-scalar"]

    def test_empty_trailer_value_is_error(self):
        report = parse_message("subject\n\nConstraint: A\nConstraint: \n")
        assert report.atom is None
        assert [f.code for f in report.errors] == ["empty-trailer-value"]
        assert report.errors[0].line == 4

    def test_continuation_joined_with_single_space(self):
        msg = "subject\n\nConstraint: part one\n\tpart two\n   part three\n"
        atom = parse_message(msg).atom
        assert atom.constraints == (ConstraintEntry("part one part two part three"),)

    def test_indented_final_paragraph_is_prose(self):
        report = parse_message("subject\n\n  just indented\n")
        assert report.atom is not None
        assert report.atom.body == "  just indented"
        assert [f.code for f in report.warnings] == ["no-trailers"]

    def test_orphan_continuation_inside_block_warns(self):
        report = parse_message("subject\n\n  dangling\nConstraint: A\n")
        assert report.atom is not None
        assert [c.text for c in report.atom.constraints] == ["A"]
        assert "orphan-continuation" in [f.code for f in report.warnings]

    def test_discarded_block_folds_back_into_body(self):
        report = parse_message("subject\n\nprose\n\nConfidence: maybe\n")
        atom = report.atom
        assert atom is not None
        assert atom.body == "prose\n\nConfidence: maybe"
        assert atom.confidence is None
        assert not atom.has_trailers
        assert [f.code for f in report.warnings] == ["invalid-enum"]

    def test_crlf_values_are_trimmed(self):
        atom = parse_message("subject\r\n\r\nConstraint: A\r\n").atom
        assert atom.constraints == (ConstraintEntry("A"),)

    def test_rejected_empty_alternative_warns_and_drops(self):
        report = parse_message("subject\n\nRejected: | only a reason\n")
        assert report.atom is not None
        assert report.atom.rejected == ()
        assert "rejected-empty-alternative" in [f.code for f in report.warnings]

    def test_related_kept_verbatim_even_when_invalid(self):
        atom = parse_message("subject\n\nRelated: zzzz\n").atom
        assert atom.related == (RelatedRef("zzzz"),)
        assert not atom.related[0].is_valid


class TestSplitTrailerBlock:
    def test_fig1(self, fig1_message):
        head, block = split_trailer_block(fig1_message)
        # the figure's block is 11 physical lines (10 trailers + 1 continuation)
        assert len(block) == 11
        head_lines = head.splitlines()
        assert head_lines[0].startswith("Prevent silent session drops")
        assert head_lines[1] == ""
        assert len(head_lines) == 5  # intent + blank + 3-line body

    def test_subject_only(self):
        assert split_trailer_block("subject only") == ("subject only", [])

    def test_mixed_paragraph_disqualifies(self):
        msg = "subject\n\nConstraint: A\nnot a trailer line\n"
        assert split_trailer_block(msg) == (msg, [])

    def test_single_paragraph_never_split(self):
        msg = "Constraint: A\nConstraint: B"
        assert split_trailer_block(msg) == (msg, [])

    @pytest.mark.parametrize(
        "message",
        [
            "subject\n\nConstraint: A\nTicket: X-1",
            "subject\n\nbody\n\nConstraint: A\n  cont",
            "subject\n\nConstraint: A\nplain",
            "subject\n\nkey:novalue",
            "subject\n\n9key: value",
            "subject\n\nConstraint: A\n\nbody after",
            "one paragraph\nConstraint: A",
            "subject\n\n  only continuation",
            "subject\n\nConstraint: A\r\n",
        ],
    )
    def test_agrees_with_line_regex_oracle(self, message):
        assert split_trailer_block(message) == block_oracle(message)


class TestRejectedValue:
    def test_paper_example(self):
        entry = parse_rejected_value("Extend token TTL to 24h | security policy violation")
        assert entry == RejectedEntry("Extend token TTL to 24h", "security policy violation")

    def test_no_separator(self):
        assert parse_rejected_value("Use a cron job") == RejectedEntry("Use a cron job", None)

    def test_splits_on_first_pipe_only(self):
        # oracle: index of the first '|' decides the split
        value = "A | B | C"
        first = value.index("|")
        expected = RejectedEntry(value[:first].strip(), value[first + 1 :].strip())
        assert parse_rejected_value(value) == expected
        assert expected.reason == "B | C"

    def test_empty_reason_side_means_unset(self):
        assert parse_rejected_value("A |") == RejectedEntry("A", None)

    def test_empty_alternative_raises(self):
        with pytest.raises(ValueError):
            parse_rejected_value("| reason")


class TestTestValue:
    def test_method_suffix(self):
        assert parse_test_value("Single expired token refresh (unit)") == TestEntry(
            "Single expired token refresh", "unit"
        )

    def test_no_suffix(self):
        assert parse_test_value("cold start") == TestEntry("cold start", None)

    def test_last_group_wins(self):
        assert parse_test_value("a (b) (c)") == TestEntry("a (b)", "c")

    def test_bare_parens_not_split(self):
        assert parse_test_value("(unit)") == TestEntry("(unit)", None)

    def test_empty_parens_not_split(self):
        assert parse_test_value("claim ()") == TestEntry("claim ()", None)


class TestSerialize:
    def test_fig1_round_trip(self, fig1_message):
        atom = parse_message(fig1_message).atom
        again = parse_message(serialize_atom(atom))
        assert again.errors == ()
        assert again.atom == atom

    def test_minimal_atom(self):
        assert serialize_atom(LoreAtom(intent="x")) == "x\n"

    def test_canonical_capitalization(self):
        msg = "subject\n\nconstraint: a\nSCOPE-RISK: wide\nnot-tested: thing\n"
        out = serialize_atom(parse_message(msg).atom)
        assert "Constraint: a" in out
        assert "Scope-risk: wide" in out
        assert "Not-tested: thing" in out

    def test_canonical_trailer_order(self):
        msg = (
            "subject\n\n"
            "Related: abcdef0\n"
            "Tested: t (unit)\n"
            "Directive: d\n"
            "Confidence: low\n"
            "Rejected: r\n"
            "Constraint: c\n"
            "Zebra: z\n"
        )
        out = serialize_atom(parse_message(msg).atom)
        block = out.split("\n\n")[-1].strip().splitlines()
        keys = [line.split(":")[0] for line in block]
        assert keys == ["Constraint", "Rejected", "Confidence", "Directive",
                        "Tested", "Related", "Zebra"]

    def test_directive_wraps_at_72_columns(self):
        long_text = " ".join(["word"] * 40)
        out = serialize_atom(LoreAtom(intent="x", directives=(DirectiveEntry(long_text),)))
        lines = out.splitlines()
        directive_lines = [ln for ln in lines if ln.startswith(("Directive:", "  "))]
        assert len(directive_lines) > 1
        assert all(len(ln) <= 72 for ln in directive_lines)
        # and the wrap is lossless
        assert parse_message(out).atom.directives[0].text == long_text

    def test_directive_with_multiple_spaces_never_broken_inside(self):
        text = "alpha  beta" + " tail" * 30
        out = serialize_atom(LoreAtom(intent="x", directives=(DirectiveEntry(text),)))
        assert parse_message(out).atom.directives[0].text == text

    def test_invalid_atom_rejected(self):
        with pytest.raises(DataError) as err:
            serialize_atom(LoreAtom(intent=""))
        assert err.value.code == "invalid-atom"

    def test_newline_in_value_rejected(self):
        atom = LoreAtom(intent="x", constraints=(ConstraintEntry("a\nb"),))
        with pytest.raises(DataError):
            serialize_atom(atom)

    def test_pipe_in_alternative_rejected(self):
        atom = LoreAtom(intent="x", rejected=(RejectedEntry("a | b", None),))
        with pytest.raises(DataError):
            serialize_atom(atom)

    def test_invalid_related_preserved_for_fidelity(self):
        atom = parse_message("subject\n\nRelated: zzzz\n").atom
        assert "Related: zzzz" in serialize_atom(atom)


class TestLint:
    def _lint(self, message):
        report = parse_message(message)
        assert report.atom is not None
        return [f.code for f in lint_atom(report.atom, report)]

    def test_conventional_prefix_flagged(self):
        codes = self._lint(
            "fix(auth): handle expired token refresh\n\nConstraint: A\n"
        )
        assert "intent-is-diff-summary" in codes

    def test_plain_type_prefix_flagged(self):
        assert "intent-is-diff-summary" in self._lint("fix: something\n\nConstraint: A\n")

    def test_sentence_intent_not_flagged(self):
        assert self._lint("Prevent drops during rollover\n\nConstraint: A\n") == []

    def test_rejected_missing_reason(self):
        codes = self._lint("subject\n\nRejected: Use a cron job\n")
        assert codes == ["rejected-missing-reason"]

    def test_related_bad_hash_is_error(self):
        report = parse_message("subject\n\nRelated: zzzz\n")
        findings = lint_atom(report.atom, report)
        assert [(f.severity, f.code) for f in findings] == [("error", "related-bad-hash")]

    def test_handbuilt_empty_value_caught(self):
        atom = LoreAtom(intent="x", constraints=(ConstraintEntry(" "),))
        report = parse_message("x\n")
        codes = [f.code for f in lint_atom(atom, report)]
        assert "empty-trailer-value" in codes


class TestExtensionPreservation:
    @pytest.mark.parametrize("count", [1, 2, 5])
    def test_counts_preserved_through_round_trip(self, count):
        block = "\n".join(f"Ticket: X-{i}" for i in range(count))
        msg = f"subject\n\n{block}\n"
        atom = parse_message(msg).atom
        assert len(atom.extensions) == count
        out = serialize_atom(atom)
        assert out.count("Ticket:") == count
        assert parse_message(out).atom == atom

    def test_extension_key_spelling_preserved(self):
        atom = parse_message("subject\n\nTiCKet: X-1\n").atom
        assert atom.extensions[0].key == "TiCKet"
        assert "TiCKet: X-1" in serialize_atom(atom)
