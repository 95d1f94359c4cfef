"""Scoring of extracted answers against ground truth.

The primary measure is a type-aware accuracy: each item carries one of
four answer types (string, date, currency, quantity) that decides how
prediction and ground truth are normalized before an exact comparison.
The same normalization is applied to both sides; a value that cannot be
parsed to its declared type becomes an empty answer. Soft string metrics
(ANLS with the standard 0.5 threshold, SQuAD-style EM/F1) cover datasets
scored that way.
"""

from __future__ import annotations

import datetime
import enum
import re
import statistics
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyEvaluation

CURRENCY_RE = re.compile(r"\d+(?:(\.|,)\d{1,2})?")
QUANTITY_RE = re.compile(r"(?:[ a-zA-Z]*)(\d+)(?:[ a-zA-Z]*)")

ANLS_THRESHOLD = 0.5


class AnswerType(enum.Enum):
    STRING = "string"
    DATE = "date"
    CURRENCY = "currency"
    QUANTITY = "quantity"

    def __str__(self) -> str:
        return self.value


class Verdict(enum.Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    BOTH_EMPTY_CORRECT = "both_empty_correct"

    def counts_correct(self, empty_pair_is_correct: bool = True) -> bool:
        if self is Verdict.CORRECT:
            return True
        return self is Verdict.BOTH_EMPTY_CORRECT and empty_pair_is_correct


def normalize_currency(s: str) -> str | None:
    """First currency-looking number in the string, commas turned to dots."""
    match = CURRENCY_RE.search(s)
    if match is None:
        return None
    return match.group(0).replace(",", ".")


def normalize_quantity(s: str) -> str | None:
    """First integer in the string, surrounding letters and spaces ignored."""
    match = QUANTITY_RE.search(s)
    if match is None:
        return None
    return match.group(1)


_MONTHS = {
    name: i + 1
    for i, names in enumerate(
        [
            ("january", "jan"), ("february", "feb"), ("march", "mar"),
            ("april", "apr"), ("may",), ("june", "jun"), ("july", "jul"),
            ("august", "aug"), ("september", "sep", "sept"), ("october", "oct"),
            ("november", "nov"), ("december", "dec"),
        ]
    )
    for name in names
}

_ISO_RE = re.compile(r"(\d{4})-(\d{1,2})-(\d{1,2})$")
_DMY_RES = [
    re.compile(r"(\d{1,2})/(\d{1,2})/(\d{4}|\d{2})$"),
    re.compile(r"(\d{1,2})-(\d{1,2})-(\d{4}|\d{2})$"),
    re.compile(r"(\d{1,2})\.(\d{1,2})\.(\d{4}|\d{2})$"),
]
_D_MONTH_Y_RE = re.compile(r"(\d{1,2})\.?\s+([a-z]+)\.?,?\s+(\d{4}|\d{2})$", re.I)
_MONTH_D_Y_RE = re.compile(r"([a-z]+)\.?\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4}|\d{2})$", re.I)


def _expand_year(year: int) -> int:
    if year >= 100:
        return year
    return 2000 + year if year < 70 else 1900 + year


def _make_date(year: int, month: int, day: int) -> datetime.date | None:
    try:
        return datetime.date(_expand_year(year), month, day)
    except ValueError:
        return None


def normalize_date(s: str) -> datetime.date | None:
    """Parse a date against a fixed, ordered format list; None on failure.

    Accepted, in order: ISO 8601 (YYYY-MM-DD); DD/MM/YYYY; DD-MM-YYYY;
    DD.MM.YYYY (each also with two-digit years, mapped to 2000-2069 /
    1970-1999); "D MonthName YYYY"; "MonthName D, YYYY" with English month
    names or their abbreviations. Numeric day/month forms are day-first.
    """
    text = s.strip()
    if not text:
        return None

    match = _ISO_RE.fullmatch(text)
    if match:
        year, month, day = (int(g) for g in match.groups())
        return _make_date(year, month, day)

    for pattern in _DMY_RES:
        match = pattern.fullmatch(text)
        if match:
            day, month, year = (int(g) for g in match.groups())
            return _make_date(year, month, day)

    match = _D_MONTH_Y_RE.fullmatch(text)
    if match:
        month = _MONTHS.get(match.group(2).lower())
        if month is not None:
            return _make_date(int(match.group(3)), month, int(match.group(1)))

    match = _MONTH_D_Y_RE.fullmatch(text)
    if match:
        month = _MONTHS.get(match.group(1).lower())
        if month is not None:
            return _make_date(int(match.group(3)), month, int(match.group(2)))

    return None


def _normalize_typed(value: str | None, answer_type: AnswerType):
    """Shared normalization; returns None for empty or unparsable values."""
    if value is None:
        return None
    text = value.strip()
    if not text:
        return None
    if answer_type is AnswerType.STRING:
        return text.casefold()
    if answer_type is AnswerType.CURRENCY:
        return normalize_currency(text)
    if answer_type is AnswerType.QUANTITY:
        return normalize_quantity(text)
    return normalize_date(text)


def compare_typed(
    pred: str | None,
    gt: str | list[str] | tuple[str, ...] | None,
    answer_type: AnswerType,
) -> Verdict:
    """Typed comparison with identical normalization on both sides.

    An unparsable value is treated as an empty answer. Both sides empty is
    the rejection case and gets its own verdict so callers can decide
    whether it counts. With several acceptable ground-truth variants, any
    match wins.
    """
    variants = [gt] if gt is None or isinstance(gt, str) else list(gt)
    if not variants:
        variants = [None]
    norm_pred = _normalize_typed(pred, answer_type)
    norm_gts = [_normalize_typed(v, answer_type) for v in variants]

    if norm_pred is None and all(g is None for g in norm_gts):
        return Verdict.BOTH_EMPTY_CORRECT
    if norm_pred is None or all(g is None for g in norm_gts):
        return Verdict.WRONG
    return Verdict.CORRECT if norm_pred in norm_gts else Verdict.WRONG


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit costs (two-row dynamic program)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[len(b)]


def anls(pred: str, gt_set, threshold: float = ANLS_THRESHOLD) -> float:
    """Normalized Levenshtein similarity against the best ground truth.

    Inputs are trimmed and lowercased. Similarities below the threshold
    collapse to 0 (the standard cut used by the VQA benchmarks).
    """
    pred_norm = pred.strip().lower()
    best = 0.0
    for gt in gt_set:
        gt_norm = gt.strip().lower()
        if not pred_norm and not gt_norm:
            similarity = 1.0
        elif not pred_norm or not gt_norm:
            similarity = 0.0
        else:
            distance = levenshtein(pred_norm, gt_norm)
            similarity = 1.0 - distance / max(len(pred_norm), len(gt_norm))
        best = max(best, similarity)
    return best if best >= threshold else 0.0


_PUNCT_RE = re.compile(r"[^\w\s]")


def _answer_tokens(s: str) -> list[str]:
    return _PUNCT_RE.sub("", s.lower()).split()


def em_f1(pred: str, gt: str) -> tuple[int, float]:
    """Exact match and bag-of-tokens F1 on lowercased, punctuation-free tokens."""
    pred_tokens = _answer_tokens(pred)
    gt_tokens = _answer_tokens(gt)
    em = int(pred_tokens == gt_tokens)
    if not pred_tokens or not gt_tokens:
        return em, float(em)
    common = sum((Counter(pred_tokens) & Counter(gt_tokens)).values())
    if common == 0:
        return em, 0.0
    precision = common / len(pred_tokens)
    recall = common / len(gt_tokens)
    return em, 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalRecord:
    """One scored item: prediction vs ground truth plus run context."""

    item_key: str
    prediction: str | None
    ground_truth: str | None
    answer_type: AnswerType
    verdict: Verdict
    gt_alternatives: tuple[str, ...] = ()
    doc_id: str = ""
    dataset: str = ""
    verbalizer: str = ""
    noise_model: str = ""

    @property
    def gt_variants(self) -> tuple[str, ...]:
        base = (self.ground_truth,) if self.ground_truth is not None else ()
        return base + self.gt_alternatives


def make_record(
    item_key: str,
    prediction: str | None,
    gt_value: str | list[str] | None,
    answer_type: AnswerType,
    **context: str,
) -> EvalRecord:
    """Build a scored record, running the typed comparison."""
    if isinstance(gt_value, str) or gt_value is None:
        primary, extras = gt_value, ()
    else:
        primary = gt_value[0] if gt_value else None
        extras = tuple(gt_value[1:])
    verdict = compare_typed(prediction, gt_value, answer_type)
    return EvalRecord(
        item_key=item_key,
        prediction=prediction,
        ground_truth=primary,
        answer_type=answer_type,
        verdict=verdict,
        gt_alternatives=extras,
        **context,
    )


def _record_score(record: EvalRecord, metric: str, empty_pair_is_correct: bool) -> float:
    pred = record.prediction or ""
    if metric == "type_aware":
        return 1.0 if record.verdict.counts_correct(empty_pair_is_correct) else 0.0
    if metric == "accuracy":
        gts = [g.strip().casefold() for g in record.gt_variants]
        if not pred.strip() and not gts:
            return 1.0
        return 1.0 if pred.strip().casefold() in gts else 0.0
    if metric == "anls":
        return anls(pred, record.gt_variants)
    if metric == "f1":
        return max(
            (em_f1(pred, gt)[1] for gt in record.gt_variants), default=float(not pred)
        )
    if metric == "em":
        return max(
            (float(em_f1(pred, gt)[0]) for gt in record.gt_variants),
            default=float(not pred),
        )
    raise ValueError(f"unknown metric {metric!r}")


def _breakdown(records, key, metric, empty_pair_is_correct):
    groups: dict[str, list[EvalRecord]] = {}
    for record in records:
        groups.setdefault(key(record) or "(none)", []).append(record)
    return {
        name: {
            "n": len(group),
            "score": statistics.fmean(
                _record_score(r, metric, empty_pair_is_correct) for r in group
            ),
        }
        for name, group in sorted(groups.items())
    }


def aggregate(
    records: list[EvalRecord],
    metric: str = "type_aware",
    empty_pair_is_correct: bool = True,
) -> dict:
    """Score a record set and break it down by verbalizer, noise and dataset.

    The overall number is the mean per-record score; the cross-dataset
    figure is the arithmetic mean of the per-dataset scores, which is also
    how mixed-metric averages are meant to be read.
    """
    if not records:
        raise EmptyEvaluation("no records to aggregate")
    per_dataset = _breakdown(records, lambda r: r.dataset, metric, empty_pair_is_correct)
    report = {
        "metric": metric,
        "n_records": len(records),
        "overall": statistics.fmean(
            _record_score(r, metric, empty_pair_is_correct) for r in records
        ),
        "per_dataset": per_dataset,
        "dataset_mean": statistics.fmean(v["score"] for v in per_dataset.values()),
        "per_verbalizer": _breakdown(
            records, lambda r: r.verbalizer, metric, empty_pair_is_correct
        ),
        "per_noise_model": _breakdown(
            records, lambda r: r.noise_model, metric, empty_pair_is_correct
        ),
    }
    if metric == "em" or metric == "f1":
        report["em"] = statistics.fmean(
            _record_score(r, "em", empty_pair_is_correct) for r in records
        )
        report["f1"] = statistics.fmean(
            _record_score(r, "f1", empty_pair_is_correct) for r in records
        )
    return report
