"""Parse model output text into per-item answers.

Model responses are requested as a single JSON object keyed by the
enumeration numbers (QA, NLI) or the requested keys (KIE), but generated
text is not guaranteed to conform. The extractor scans arbitrary text for
JSON objects, picks the object answering the most of the expected keys,
and reads scalar answers from it; everything unexpected is surfaced as a
diagnostic instead of an exception. Worst case is an all-empty result.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

DIAG_NO_JSON = "no-json"
DIAG_MULTIPLE_OBJECTS = "multiple-objects"
DIAG_HALLUCINATED_KEY = "hallucinated-key"
DIAG_NESTED_VALUE = "nested-value"
DIAG_LENIENT_JSON = "lenient-json"

_SCALARS = (str, int, float, bool)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")


@dataclass(frozen=True)
class Diagnostic:
    code: str
    detail: str


@dataclass
class ExtractionResult:
    """One entry per expected key (value None when nothing was extracted)."""

    answers: dict[str, str | None]
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "answers": self.answers,
            "diagnostics": [
                {"code": d.code, "detail": d.detail} for d in self.diagnostics
            ],
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "ExtractionResult":
        return cls(
            answers=dict(record["answers"]),
            diagnostics=[
                Diagnostic(d["code"], d["detail"]) for d in record.get("diagnostics", [])
            ],
        )


def _match_brace(text: str, start: int) -> int | None:
    """Index one past the brace matching text[start], or None.

    Skips brace characters inside double-quoted JSON string literals,
    honoring backslash escapes.
    """
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return None


def find_json_objects(text: str) -> list[str]:
    """All maximal balanced-brace spans that parse as JSON objects, in order.

    Brace matching is string-literal aware, so braces inside quoted values
    do not end a span. A span that is balanced but unparsable is stepped
    into, which surfaces any valid objects nested inside it.
    """
    spans: list[str] = []
    i = 0
    while i < len(text):
        if text[i] != "{":
            i += 1
            continue
        end = _match_brace(text, i)
        if end is not None:
            candidate = text[i:end]
            try:
                parsed = json.loads(candidate)
            except ValueError:
                parsed = None
            if isinstance(parsed, dict):
                spans.append(candidate)
                i = end
                continue
        i += 1
    return spans


def _find_lenient_objects(text: str) -> list[str]:
    """Second-chance scan tolerating trailing commas and single quotes."""
    spans: list[str] = []
    i = 0
    while i < len(text):
        if text[i] != "{":
            i += 1
            continue
        end = _match_brace(text, i)
        if end is None:
            i += 1
            continue
        candidate = text[i:end]
        if _parse_lenient(candidate) is not None:
            spans.append(candidate)
            i = end
        else:
            i += 1
    return spans


def _parse_lenient(candidate: str) -> dict | None:
    try:
        parsed = json.loads(_TRAILING_COMMA.sub(r"\1", candidate))
        if isinstance(parsed, dict):
            return parsed
    except ValueError:
        pass
    try:
        parsed = ast.literal_eval(candidate)
        if isinstance(parsed, dict):
            return parsed
    except (ValueError, SyntaxError, MemoryError, RecursionError):
        pass
    return None


def select_object(objects: list[dict], expected_keys: Iterable[str]) -> dict | None:
    """The object answering the most expected keys; earliest wins a tie."""
    if not objects:
        return None
    expected = set(expected_keys)
    best = objects[0]
    best_hits = len(expected & set(best.keys()))
    for obj in objects[1:]:
        hits = len(expected & set(obj.keys()))
        if hits > best_hits:
            best, best_hits = obj, hits
    return best


def _stringify(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # Integral numbers render without a decimal point; formatting is
        # locale-independent either way.
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return str(value)


def read_answers(
    obj: dict | None, expected_keys: Iterable[str]
) -> ExtractionResult:
    """Pull one answer per expected key out of the selected object.

    Scalar values (string, number, boolean) are stringified; nested objects
    and arrays are treated as failures and reported, not flattened. A null
    value counts as an explicit empty answer.
    """
    expected = list(expected_keys)
    answers: dict[str, str | None] = {key: None for key in expected}
    diagnostics: list[Diagnostic] = []
    if obj is None:
        return ExtractionResult(answers=answers, diagnostics=diagnostics)

    missing = []
    for key in expected:
        if key not in obj:
            missing.append(key)
            continue
        value = obj[key]
        if value is None:
            continue
        if isinstance(value, _SCALARS):
            answers[key] = _stringify(value)
        else:
            diagnostics.append(
                Diagnostic(DIAG_NESTED_VALUE, f"key {key!r} holds a nested value")
            )

    unexpected = [key for key in obj if key not in answers]
    if missing and unexpected:
        diagnostics.append(
            Diagnostic(
                DIAG_HALLUCINATED_KEY,
                f"missing {missing}, object has unexpected keys {unexpected}",
            )
        )
    return ExtractionResult(answers=answers, diagnostics=diagnostics)


def extract_answers(output: str, expected_keys: Iterable[str]) -> ExtractionResult:
    """Full readout: scan, select, read. Never raises on any input text."""
    expected = list(expected_keys)
    raw_spans = find_json_objects(output)
    lenient = False
    if not raw_spans:
        raw_spans = _find_lenient_objects(output)
        lenient = bool(raw_spans)

    if not raw_spans:
        result = read_answers(None, expected)
        result.diagnostics.append(
            Diagnostic(DIAG_NO_JSON, "no JSON object found in model output")
        )
        return result

    parse = _parse_lenient if lenient else json.loads
    objects = [parse(span) for span in raw_spans]
    selected = select_object(objects, expected)
    result = read_answers(selected, expected)
    if lenient:
        result.diagnostics.append(
            Diagnostic(DIAG_LENIENT_JSON, "object parsed only by the lenient pass")
        )
    if len(objects) > 1:
        result.diagnostics.append(
            Diagnostic(
                DIAG_MULTIPLE_OBJECTS,
                f"{len(objects)} objects found; kept the one with the most answers",
            )
        )
    return result
