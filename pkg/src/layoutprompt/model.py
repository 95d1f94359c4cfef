"""Canonical in-memory document model.

Coordinates use the usual raster convention: origin at the top-left corner
of the page, x growing right, y growing down, units are pixels. All
coordinates are integers; real-valued inputs are rounded half-up at
ingestion. Every type here is immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from .errors import EmptyDocument, GeometryError


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero toward +inf.

    Used everywhere a pixel coordinate is rounded, so results are
    reproducible across platforms (banker's rounding is not).
    """
    return math.floor(value + 0.5)


@dataclass(frozen=True)
class TextBox:
    """One OCR unit: a text string plus its axis-aligned pixel box.

    ``reading_index`` is the box's position in the OCR engine's reading
    order within its page; ``line_id`` is the OCR line index when the
    engine provides one.
    """

    text: str
    left: int
    top: int
    right: int
    bottom: int
    reading_index: int = 0
    line_id: int | None = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise GeometryError(f"box at index {self.reading_index} has empty text")
        if self.left < 0 or self.top < 0:
            raise GeometryError(
                f"box {self.text!r}: negative coordinates ({self.left},{self.top})"
            )
        if self.left >= self.right or self.top >= self.bottom:
            raise GeometryError(
                f"box {self.text!r}: zero or negative area "
                f"({self.left},{self.top},{self.right},{self.bottom})"
            )

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.bottom - self.top

    def shifted(self, dx: int, dy: int) -> "TextBox":
        """Copy of this box translated by (dx, dy)."""
        return TextBox(
            text=self.text,
            left=self.left + dx,
            top=self.top + dy,
            right=self.right + dx,
            bottom=self.bottom + dy,
            reading_index=self.reading_index,
            line_id=self.line_id,
        )


def center(box: TextBox) -> tuple[int, int]:
    """Center point of a box, rounded half-up per axis."""
    return (
        round_half_up((box.left + box.right) / 2),
        round_half_up((box.top + box.bottom) / 2),
    )


@dataclass(frozen=True)
class Page:
    """An ordered collection of text boxes, optionally with known extent."""

    boxes: tuple[TextBox, ...] = ()
    width: int | None = None
    height: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "boxes", tuple(self.boxes))
        indices = [b.reading_index for b in self.boxes]
        if sorted(indices) != list(range(len(self.boxes))):
            raise GeometryError(
                "reading_index values must be unique and contiguous from 0"
            )
        if self.width is not None and any(b.right > self.width for b in self.boxes):
            raise GeometryError("box exceeds declared page width")
        if self.height is not None and any(b.bottom > self.height for b in self.boxes):
            raise GeometryError("box exceeds declared page height")

    @property
    def extent(self) -> tuple[int, int]:
        """(width, height); derived from the boxes when not declared."""
        width = self.width if self.width is not None else max(
            (b.right for b in self.boxes), default=0
        )
        height = self.height if self.height is not None else max(
            (b.bottom for b in self.boxes), default=0
        )
        return width, height


@dataclass(frozen=True)
class OcrDocument:
    """Ordered pages of ordered boxes; the pipeline's universal input.

    ``source`` names the ingestion adapter that produced the document and
    is provenance only (excluded from equality). ``html`` carries the raw
    page source for documents that have one (HTML passthrough verbalizer).
    """

    doc_id: str
    pages: tuple[Page, ...]
    source: str = field(default="memory", compare=False)
    html: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "pages", tuple(self.pages))
        if not self.pages:
            raise GeometryError(f"document {self.doc_id!r} has no pages")

    def iter_boxes(self):
        for page in self.pages:
            yield from page.boxes

    @property
    def box_count(self) -> int:
        return sum(len(page.boxes) for page in self.pages)


@dataclass(frozen=True)
class CharMetrics:
    """Typical character cell size of a document, in pixels."""

    char_width: float
    char_height: float

    def __post_init__(self) -> None:
        if self.char_width <= 0 or self.char_height <= 0:
            raise GeometryError("character metrics must be strictly positive")


def derive_char_metrics(doc: OcrDocument) -> CharMetrics:
    """Estimate the character cell from box geometry.

    char_width is the median over boxes of box width divided by the box's
    character count; char_height is the median box height. Both estimates
    are invariant under box reordering.
    """
    widths = []
    heights = []
    for box in doc.iter_boxes():
        widths.append(box.width / len(box.text))
        heights.append(float(box.height))
    if not widths:
        raise EmptyDocument(f"document {doc.doc_id!r} contains no boxes")
    return CharMetrics(
        char_width=statistics.median(widths),
        char_height=statistics.median(heights),
    )


def _vertical_overlap(a: TextBox, b: TextBox) -> float:
    return min(a.bottom, b.bottom) - max(a.top, b.top)


def _same_row(a: TextBox, b: TextBox) -> bool:
    # Same row iff the vertical intervals overlap by at least half of the
    # smaller box height; transitive closure happens in group_rows.
    return _vertical_overlap(a, b) >= 0.5 * min(a.height, b.height)


def group_rows(page: Page) -> list[list[TextBox]]:
    """Partition a page's boxes into visual rows.

    Two boxes share a row iff their vertical intervals overlap by at least
    50% of the smaller box height, transitively closed. Rows are sorted by
    mean top ascending; within a row boxes are sorted by left ascending,
    ties broken by reading_index. Every box appears in exactly one row.
    """
    boxes = list(page.boxes)
    if not boxes:
        return []

    parent = list(range(len(boxes)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if _same_row(boxes[i], boxes[j]):
                parent[find(i)] = find(j)

    groups: dict[int, list[TextBox]] = {}
    for i, box in enumerate(boxes):
        groups.setdefault(find(i), []).append(box)

    rows = list(groups.values())
    for row in rows:
        row.sort(key=lambda b: (b.left, b.reading_index))
    rows.sort(
        key=lambda row: (
            statistics.fmean(b.top for b in row),
            min(b.reading_index for b in row),
        )
    )
    return rows
