"""Shared fixtures and seeded page generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from layoutprompt.model import OcrDocument, Page, TextBox

DATA_DIR = Path(__file__).parent / "data"


def box(text: str, left: int, top: int, right: int, bottom: int,
        reading_index: int = 0, line_id: int | None = None) -> TextBox:
    return TextBox(text=text, left=left, top=top, right=right, bottom=bottom,
                   reading_index=reading_index, line_id=line_id)


def page_of(*boxes: TextBox, width: int | None = None, height: int | None = None) -> Page:
    return Page(boxes=tuple(boxes), width=width, height=height)


def doc_of(*pages: Page, doc_id: str = "doc", html: str | None = None) -> OcrDocument:
    return OcrDocument(doc_id=doc_id, pages=tuple(pages), html=html)


def single_box_doc(text: str, left: int, top: int, right: int, bottom: int) -> OcrDocument:
    return doc_of(page_of(box(text, left, top, right, bottom)))


@pytest.fixture
def ref_box_doc() -> OcrDocument:
    """The reference example box used throughout the format definitions."""
    return single_box_doc("TAX INVOICE", 100, 50, 321, 100)


def random_structured_page(rng: random.Random, max_rows: int = 5,
                           max_per_row: int = 4) -> Page:
    """A page with row structure: unique fixed-width texts, no whitespace.

    Texts all have the same length, so none is a substring of another and
    their positions in verbalized output can be located unambiguously.
    """
    boxes: list[TextBox] = []
    y = rng.randint(0, 60)
    idx = 0
    for _ in range(rng.randint(1, max_rows)):
        row_height = rng.randint(10, 28)
        x = rng.randint(0, 40)
        for _ in range(rng.randint(1, max_per_row)):
            text = f"w{idx:04d}"
            idx += 1
            char_w = rng.randint(6, 14)
            width = len(text) * char_w
            jitter = rng.randint(0, 2)
            boxes.append(TextBox(
                text=text, left=x, top=y + jitter, right=x + width,
                bottom=y + jitter + row_height, reading_index=len(boxes),
            ))
            x += width + rng.randint(char_w, 8 * char_w)
        y += row_height + rng.randint(2, 90)
    return Page(boxes=tuple(boxes))


def random_scatter_page(rng: random.Random, max_boxes: int = 14) -> Page:
    """A page of arbitrarily placed boxes with unique texts."""
    boxes: list[TextBox] = []
    for i in range(rng.randint(1, max_boxes)):
        left = rng.randint(0, 900)
        top = rng.randint(0, 1200)
        width = rng.randint(5, 220)
        height = rng.randint(5, 60)
        boxes.append(TextBox(
            text=f"t{i:04d}", left=left, top=top,
            right=left + width, bottom=top + height, reading_index=i,
        ))
    return Page(boxes=tuple(boxes))
