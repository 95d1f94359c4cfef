"""Prompt templates: golden-file fidelity and schema derivation."""

import pytest

from layoutprompt.prompts import (
    FORMAT_PLACEHOLDER,
    PromptPattern,
    TaskKind,
    TaskRequest,
    enumerate_items,
    expected_answer_schema,
    load_template,
    render_prompt,
    strip_format_block,
)
from layoutprompt.verbalize import Verbalization, VerbalizerId, format_description

from conftest import DATA_DIR

GOLDEN_DIR = DATA_DIR / "golden_prompts"

RECEIPT_TEXT = "ACME STORE\n2 x Green Tea 3.00\nTOTAL 6.00"

TASKS = {
    TaskKind.QA: TaskRequest(kind=TaskKind.QA, items=(
        "How many of the item 'Green Tea' were purchased?",
        "What is the total amount?",
        "Which company issued the receipt?",
    )),
    TaskKind.NLI: TaskRequest(kind=TaskKind.NLI, items=(
        "The total amount is 6.00",
        "The receipt lists Black Tea",
    )),
    TaskKind.KIE: TaskRequest(kind=TaskKind.KIE, items=("company", "date")),
}


def receipt_verbalization() -> Verbalization:
    return Verbalization(
        verbalizer=VerbalizerId.PlainText,
        text=RECEIPT_TEXT,
        format_description=format_description(VerbalizerId.PlainText),
    )


class TestGoldenPrompts:
    @pytest.mark.parametrize("kind", list(TaskKind))
    @pytest.mark.parametrize("pattern", list(PromptPattern))
    def test_byte_exact_against_golden_file(self, kind, pattern):
        rendered = render_prompt(receipt_verbalization(), TASKS[kind], pattern)
        golden = (GOLDEN_DIR / f"{kind.value.lower()}_{pattern.value.lower()}.txt").read_text(
            encoding="utf-8")
        assert rendered == golden

    @pytest.mark.parametrize("kind", list(TaskKind))
    def test_pattern_a_is_b_minus_format_block(self, kind):
        template_b = load_template(kind, PromptPattern.B)
        template_a = load_template(kind, PromptPattern.A)
        assert strip_format_block(template_b) == template_a
        assert FORMAT_PLACEHOLDER not in template_a

    @pytest.mark.parametrize("kind", list(TaskKind))
    def test_rendered_a_is_subsequence_of_b(self, kind):
        a = render_prompt(receipt_verbalization(), TASKS[kind], PromptPattern.A)
        b = render_prompt(receipt_verbalization(), TASKS[kind], PromptPattern.B)
        description = format_description(VerbalizerId.PlainText)
        assert b.replace(description + "\n\n", "", 1) == a
        assert description not in a

    @pytest.mark.parametrize("kind", list(TaskKind))
    @pytest.mark.parametrize("pattern", list(PromptPattern))
    def test_every_item_appears_exactly_once(self, kind, pattern):
        rendered = render_prompt(receipt_verbalization(), TASKS[kind], pattern)
        for item in TASKS[kind].items:
            assert rendered.count(item) == 1

    def test_fences_survive(self):
        rendered = render_prompt(receipt_verbalization(), TASKS[TaskKind.QA], PromptPattern.B)
        assert rendered.startswith("$$$\n")
        assert '"$$$"' in rendered

    def test_empty_document_text_allowed(self):
        empty = Verbalization(VerbalizerId.PlainText, "", "desc")
        rendered = render_prompt(empty, TASKS[TaskKind.QA], PromptPattern.A)
        assert rendered.startswith("$$$\n\n$$$\n")


class TestEnumerateItems:
    def test_qa_numbering_from_zero(self):
        assert enumerate_items(["Q1", "Q2"], TaskKind.QA) == "(0) Q1\n(1) Q2"

    def test_kie_keys_verbatim(self):
        assert enumerate_items(["total"], TaskKind.KIE) == "total"

    def test_single_question(self):
        assert enumerate_items(["only"], TaskKind.NLI) == "(0) only"


class TestTaskRequest:
    def test_needs_items(self):
        with pytest.raises(ValueError):
            TaskRequest(kind=TaskKind.QA, items=())

    def test_kie_keys_unique(self):
        with pytest.raises(ValueError):
            TaskRequest(kind=TaskKind.KIE, items=("a", "a"))

    def test_answer_types_must_align(self):
        with pytest.raises(ValueError):
            TaskRequest(kind=TaskKind.KIE, items=("a", "b"), answer_types=("string",))


class TestExpectedSchema:
    def test_qa_two_items(self):
        schema = expected_answer_schema(TaskRequest(kind=TaskKind.QA, items=("a", "b")))
        assert schema.keys == ("0", "1")
        assert schema.value_domain is None

    def test_kie_keys_pass_through(self):
        schema = expected_answer_schema(
            TaskRequest(kind=TaskKind.KIE, items=("company", "total")))
        assert schema.keys == ("company", "total")

    def test_nli_value_domain(self):
        schema = expected_answer_schema(TaskRequest(kind=TaskKind.NLI, items=("s",)))
        assert schema.keys == ("0",)
        assert schema.value_domain == ("0", "1")
