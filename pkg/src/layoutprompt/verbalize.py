"""Verbalization strategies: OcrDocument -> prompt-ready text.

Seven strategies are available, from the layout-free plain-text baseline
to a whitespace grid that reconstructs the page layout. Each strategy also
carries a short English description of its output format that prompts can
include to guide the model.
"""

from __future__ import annotations

import enum
import json
import statistics
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MissingHtml
from .ingest import load_lines_fallback
from .model import (
    CharMetrics,
    OcrDocument,
    Page,
    center,
    derive_char_metrics,
    group_rows,
    round_half_up,
)

MAX_ROW_GAP_NEWLINES = 4


class VerbalizerId(enum.Enum):
    """The available verbalization strategies."""

    PlainText = "PlainText"
    BoundingBox = "BoundingBox"
    BoundingBoxMarkup = "BoundingBoxMarkup"
    CenterPoint = "CenterPoint"
    SpatialFormat = "SpatialFormat"
    SpatialFormatY = "SpatialFormatY"
    PlainHTML = "PlainHTML"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Verbalization:
    """A textual document representation plus its provenance."""

    verbalizer: VerbalizerId
    text: str
    format_description: str


def _load_default_descriptions() -> dict[str, str]:
    raw = resources.files(__package__).joinpath("data/format_descriptions.json")
    data = json.loads(raw.read_text(encoding="utf-8"))
    return dict(data["descriptions"])


_DESCRIPTIONS = _load_default_descriptions()


def load_descriptions(path: str | Path) -> dict[str, str]:
    """Load alternative format descriptions from a config file.

    The file uses the same schema as the shipped
    ``data/format_descriptions.json``.
    """
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    merged = dict(_DESCRIPTIONS)
    merged.update(data["descriptions"])
    return merged


def format_description(
    verbalizer: VerbalizerId, descriptions: dict[str, str] | None = None
) -> str:
    """The fixed English description of a verbalizer's output format."""
    table = descriptions if descriptions is not None else _DESCRIPTIONS
    return table[verbalizer.value]


def _finish(
    verbalizer: VerbalizerId, text: str, descriptions: dict[str, str] | None
) -> Verbalization:
    return Verbalization(
        verbalizer=verbalizer,
        text=text,
        format_description=format_description(verbalizer, descriptions),
    )


def verbalize_plain_text(
    doc: OcrDocument, descriptions: dict[str, str] | None = None
) -> Verbalization:
    """Text lines concatenated with newlines; no layout information."""
    text = "\n".join(load_lines_fallback(doc))
    return _finish(VerbalizerId.PlainText, text, descriptions)


def verbalize_bounding_box(
    doc: OcrDocument, descriptions: dict[str, str] | None = None
) -> Verbalization:
    """One ``left:.. top:.. right:.. bottom:.. text:'..'`` record per box."""
    records = [
        f"left:{b.left} top:{b.top} right:{b.right} bottom:{b.bottom} text:'{b.text}'"
        for b in doc.iter_boxes()
    ]
    return _finish(VerbalizerId.BoundingBox, "\n".join(records), descriptions)


def verbalize_bounding_box_markup(
    doc: OcrDocument, descriptions: dict[str, str] | None = None
) -> Verbalization:
    """One ``<box left=.. top=.. right=.. bottom=../> text`` record per box."""
    records = [
        f"<box left={b.left} top={b.top} right={b.right} bottom={b.bottom}/> {b.text}"
        for b in doc.iter_boxes()
    ]
    return _finish(VerbalizerId.BoundingBoxMarkup, "\n".join(records), descriptions)


def verbalize_center_point(
    doc: OcrDocument, descriptions: dict[str, str] | None = None
) -> Verbalization:
    """One ``<box x=.. y=../> text`` record per box, using the box center."""
    records = []
    for b in doc.iter_boxes():
        x, y = center(b)
        records.append(f"<box x={x} y={y}/> {b.text}")
    return _finish(VerbalizerId.CenterPoint, "\n".join(records), descriptions)


def _row_gap_newlines(delta_top: float, char_height: float) -> int:
    gap = round_half_up(delta_top / char_height)
    return max(1, min(MAX_ROW_GAP_NEWLINES, gap))


def _spatial_page(page: Page, metrics: CharMetrics, horizontal: bool) -> str:
    rows = group_rows(page)
    if not rows:
        return ""
    min_left = min(b.left for b in page.boxes)

    out_lines: list[str] = []
    prev_mean_top: float | None = None
    for row in rows:
        mean_top = statistics.fmean(b.top for b in row)
        if prev_mean_top is not None:
            gap = _row_gap_newlines(mean_top - prev_mean_top, metrics.char_height)
            out_lines.extend([""] * (gap - 1))
        prev_mean_top = mean_top

        if horizontal:
            line = ""
            for box in row:
                column = round_half_up((box.left - min_left) / metrics.char_width)
                if column > len(line):
                    line += " " * (column - len(line))
                elif line:
                    # Collision with already placed text: keep one space so
                    # no text is ever truncated or merged.
                    line += " "
                line += box.text
            out_lines.append(line)
        else:
            out_lines.append(" ".join(box.text for box in row))
    return "\n".join(out_lines)


def _spatial_text(doc: OcrDocument, metrics: CharMetrics | None, horizontal: bool) -> str:
    if doc.box_count == 0:
        return ""
    if metrics is None:
        metrics = derive_char_metrics(doc)
    page_texts = [_spatial_page(page, metrics, horizontal) for page in doc.pages]
    # Pages are separated by one empty line; pages without boxes contribute
    # nothing (keeps the <=4 consecutive newline cap intact).
    return "\n\n".join(t for t in page_texts if t)


def verbalize_spatial_format(
    doc: OcrDocument,
    metrics: CharMetrics | None = None,
    descriptions: dict[str, str] | None = None,
) -> Verbalization:
    """Reconstruct the page layout on a character grid.

    Each visual row becomes one output line; a box's text starts at the
    column given by its left offset from the page margin divided by the
    document's character width. Vertical gaps between rows become 1 to 4
    newlines depending on the gap in character heights. Texts are never
    truncated: a text whose computed column is already occupied is placed
    one space after the text before it.
    """
    text = _spatial_text(doc, metrics, horizontal=True)
    return _finish(VerbalizerId.SpatialFormat, text, descriptions)


def verbalize_spatial_format_y(
    doc: OcrDocument,
    metrics: CharMetrics | None = None,
    descriptions: dict[str, str] | None = None,
) -> Verbalization:
    """Vertical layout only: same rows as SpatialFormat, single spaces within."""
    text = _spatial_text(doc, metrics, horizontal=False)
    return _finish(VerbalizerId.SpatialFormatY, text, descriptions)


def verbalize_plain_html(
    html: str, descriptions: dict[str, str] | None = None
) -> Verbalization:
    """Pass a document's HTML source through unchanged."""
    return _finish(VerbalizerId.PlainHTML, html, descriptions)


def verbalize(
    doc: OcrDocument,
    verbalizer: VerbalizerId,
    metrics: CharMetrics | None = None,
    descriptions: dict[str, str] | None = None,
) -> Verbalization:
    """Apply a strategy by id. Raises MissingHtml for PlainHTML without HTML."""
    if verbalizer is VerbalizerId.PlainText:
        return verbalize_plain_text(doc, descriptions)
    if verbalizer is VerbalizerId.BoundingBox:
        return verbalize_bounding_box(doc, descriptions)
    if verbalizer is VerbalizerId.BoundingBoxMarkup:
        return verbalize_bounding_box_markup(doc, descriptions)
    if verbalizer is VerbalizerId.CenterPoint:
        return verbalize_center_point(doc, descriptions)
    if verbalizer is VerbalizerId.SpatialFormat:
        return verbalize_spatial_format(doc, metrics, descriptions)
    if verbalizer is VerbalizerId.SpatialFormatY:
        return verbalize_spatial_format_y(doc, metrics, descriptions)
    if verbalizer is VerbalizerId.PlainHTML:
        if doc.html is None:
            raise MissingHtml(f"document {doc.doc_id!r} has no attached HTML")
        return verbalize_plain_html(doc.html, descriptions)
    raise ValueError(f"unknown verbalizer {verbalizer!r}")
