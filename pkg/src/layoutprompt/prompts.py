"""Prompt assembly from verbalizations and task definitions.

Templates are plain text files shipped with the package, one per
(task kind, pattern) pair, holding the placeholders ``<<<CONTENT>>>``,
``<<<QUESTION>>>`` and ``<<<FORMAT>>>`` (pattern A files omit the FORMAT
block). Pattern A orders the blocks DOCUMENT TASK OUTPUT; pattern B adds
the verbalizer format description: DOCUMENT TASK FORMAT OUTPUT.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .verbalize import Verbalization

CONTENT_PLACEHOLDER = "<<<CONTENT>>>"
QUESTION_PLACEHOLDER = "<<<QUESTION>>>"
FORMAT_PLACEHOLDER = "<<<FORMAT>>>"

NLI_VALUE_DOMAIN = ("0", "1")


class TaskKind(enum.Enum):
    QA = "QA"
    NLI = "NLI"
    KIE = "KIE"

    def __str__(self) -> str:
        return self.value


class PromptPattern(enum.Enum):
    A = "A"
    B = "B"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TaskRequest:
    """A batch of questions (QA), statements (NLI) or keys (KIE)."""

    kind: TaskKind
    items: tuple[str, ...]
    answer_types: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise ValueError("a task needs at least one item")
        if any(not item for item in self.items):
            raise ValueError("task items must be non-empty strings")
        if self.kind is TaskKind.KIE and len(set(self.items)) != len(self.items):
            raise ValueError("KIE keys must be unique")
        if self.answer_types is not None:
            object.__setattr__(self, "answer_types", tuple(self.answer_types))
            if len(self.answer_types) != len(self.items):
                raise ValueError("answer_types must match items one to one")


@dataclass(frozen=True)
class ExpectedSchema:
    """The JSON keys a model response must use, plus any value constraint."""

    keys: tuple[str, ...]
    value_domain: tuple[str, ...] | None = None


@lru_cache(maxsize=None)
def load_template(kind: TaskKind, pattern: PromptPattern) -> str:
    name = f"{kind.value.lower()}_{pattern.value.lower()}.txt"
    return (
        resources.files(__package__).joinpath("templates").joinpath(name)
        .read_text(encoding="utf-8")
    )


def enumerate_items(items: tuple[str, ...] | list[str], kind: TaskKind) -> str:
    """Render the task item block: ``(i) item`` lines from 0, keys verbatim."""
    if kind is TaskKind.KIE:
        return "\n".join(items)
    return "\n".join(f"({i}) {item}" for i, item in enumerate(items))


def render_prompt(
    verbalization: Verbalization, task: TaskRequest, pattern: PromptPattern
) -> str:
    """Fill the task template with document content, items and format note."""
    template = load_template(task.kind, pattern)
    prompt = template.replace(CONTENT_PLACEHOLDER, verbalization.text)
    prompt = prompt.replace(
        QUESTION_PLACEHOLDER, enumerate_items(task.items, task.kind)
    )
    if pattern is PromptPattern.B:
        prompt = prompt.replace(FORMAT_PLACEHOLDER, verbalization.format_description)
    return prompt


def expected_answer_schema(task: TaskRequest) -> ExpectedSchema:
    """The response-object keys implied by a task.

    QA and NLI answers are keyed "0".."n-1"; KIE answers use the requested
    keys verbatim. NLI values are constrained to "1" (true) / "0" (false).
    """
    if task.kind is TaskKind.KIE:
        return ExpectedSchema(keys=task.items)
    keys = tuple(str(i) for i in range(len(task.items)))
    domain = NLI_VALUE_DOMAIN if task.kind is TaskKind.NLI else None
    return ExpectedSchema(keys=keys, value_domain=domain)


def strip_format_block(template_b: str) -> str:
    """Pattern A text derived from a pattern B template.

    Removes the ``<<<FORMAT>>>`` line and one adjacent blank line, leaving
    exactly one blank line between the TASK and OUTPUT blocks. Used to keep
    the checked-in A templates honest.
    """
    return template_b.replace(f"{FORMAT_PLACEHOLDER}\n\n", "", 1)
