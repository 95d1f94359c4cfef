"""Parsers from external OCR files into the document model.

Two adapters are supported:

* the toolkit's canonical interchange format (JSON, schema below), and
* a DUE-benchmark style word list with page and line indices, where words
  sharing a (page, line) pair are joined into line-level boxes.

Canonical schema (UTF-8 JSON, unknown fields ignored)::

    {
      "doc_id": "...",
      "html": "...",                    # optional
      "pages": [
        {
          "width": 1240,                # optional
          "height": 1754,               # optional
          "words": [
            {"text": "TAX INVOICE", "box": [100, 50, 321, 100], "line_id": 0}
          ]
        }
      ]
    }

Word order in the file defines the reading order. Boxes are
[left, top, right, bottom] pixels with left < right and top < bottom;
real values are rounded half-up.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import GeometryError, ParseError
from .model import OcrDocument, Page, TextBox, group_rows, round_half_up


def _require(condition: bool, where: str, message: str) -> None:
    if not condition:
        raise ParseError(f"{where}: {message}")


def _parse_box(raw, where: str) -> tuple[int, int, int, int]:
    _require(isinstance(raw, (list, tuple)), where, "box must be an array")
    _require(len(raw) == 4, where, f"box must have 4 numbers, got {len(raw)}")
    _require(
        all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw),
        where,
        "box entries must be numbers",
    )
    left, top, right, bottom = (round_half_up(float(v)) for v in raw)
    if left >= right or top >= bottom:
        raise GeometryError(f"{where}: degenerate box [{left},{top},{right},{bottom}]")
    if left < 0 or top < 0:
        raise GeometryError(f"{where}: negative coordinates [{left},{top}]")
    return left, top, right, bottom


def _parse_word(raw, reading_index: int, where: str) -> TextBox:
    _require(isinstance(raw, dict), where, "word must be an object")
    text = raw.get("text")
    _require(isinstance(text, str), where, "missing or non-string 'text'")
    _require(bool(text.strip()), where, "'text' is empty")
    _require("box" in raw, where, "missing 'box'")
    left, top, right, bottom = _parse_box(raw["box"], f"{where}.box")
    line_id = raw.get("line_id")
    if line_id is not None:
        _require(
            isinstance(line_id, int) and not isinstance(line_id, bool),
            where,
            "'line_id' must be an integer",
        )
    return TextBox(
        text=text.strip(),
        left=left,
        top=top,
        right=right,
        bottom=bottom,
        reading_index=reading_index,
        line_id=line_id,
    )


def _load_json(path: str | Path):
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def load_canonical(path: str | Path) -> OcrDocument:
    """Load a canonical OCR file; word order defines reading_index per page."""
    data = _load_json(path)
    _require(isinstance(data, dict), str(path), "top level must be an object")
    doc_id = data.get("doc_id")
    _require(isinstance(doc_id, str) and bool(doc_id), "doc_id", "missing or empty")
    raw_pages = data.get("pages")
    _require(isinstance(raw_pages, list) and len(raw_pages) > 0, "pages", "must be a non-empty array")

    pages = []
    for p, raw_page in enumerate(raw_pages):
        where = f"pages[{p}]"
        _require(isinstance(raw_page, dict), where, "page must be an object")
        raw_words = raw_page.get("words", [])
        _require(isinstance(raw_words, list), f"{where}.words", "must be an array")
        boxes = tuple(
            _parse_word(raw_word, i, f"{where}.words[{i}]")
            for i, raw_word in enumerate(raw_words)
        )
        width = raw_page.get("width")
        height = raw_page.get("height")
        for name, value in (("width", width), ("height", height)):
            _require(
                value is None or (isinstance(value, int) and not isinstance(value, bool)),
                f"{where}.{name}",
                "must be an integer",
            )
        pages.append(Page(boxes=boxes, width=width, height=height))

    html = data.get("html")
    _require(html is None or isinstance(html, str), "html", "must be a string")
    return OcrDocument(doc_id=doc_id, pages=tuple(pages), source="canonical", html=html)


def canonical_payload(doc: OcrDocument) -> dict:
    """The document as a canonical-format JSON-serializable dict."""
    payload = {
        "doc_id": doc.doc_id,
        "pages": [
            {
                **({"width": page.width} if page.width is not None else {}),
                **({"height": page.height} if page.height is not None else {}),
                "words": [
                    {
                        "text": box.text,
                        "box": [box.left, box.top, box.right, box.bottom],
                        **({"line_id": box.line_id} if box.line_id is not None else {}),
                    }
                    for box in page.boxes
                ],
            }
            for page in doc.pages
        ],
    }
    if doc.html is not None:
        payload["html"] = doc.html
    return payload


def save_canonical(doc: OcrDocument, path: str | Path) -> None:
    """Write a document back out in the canonical format (UTF-8, no BOM)."""
    Path(path).write_text(
        json.dumps(canonical_payload(doc), ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8",
    )


def load_due(path: str | Path) -> OcrDocument:
    """Load DUE-style OCR: per-word boxes with page and line indices.

    Expected schema::

        {"name": "...", "words": [
            {"text": "TAX", "box": [l, t, r, b], "page": 0, "line": 3}, ...
        ]}

    Words carrying the same (page, line) are joined into a single box whose
    text is the space-joined word texts and whose geometry is the union of
    the word boxes. Line order follows first appearance in the file; words
    never mix across pages.
    """
    data = _load_json(path)
    _require(isinstance(data, dict), str(path), "top level must be an object")
    doc_id = data.get("name") or data.get("doc_id")
    _require(isinstance(doc_id, str) and bool(doc_id), "name", "missing or empty")
    raw_words = data.get("words")
    _require(isinstance(raw_words, list), "words", "must be an array")

    # (page, line) -> [texts, union box]; insertion order preserves line order.
    lines: dict[tuple[int, int], dict] = {}
    max_page = 0
    for i, raw in enumerate(raw_words):
        where = f"words[{i}]"
        _require(isinstance(raw, dict), where, "word must be an object")
        text = raw.get("text")
        _require(isinstance(text, str) and bool(text.strip()), where, "missing 'text'")
        left, top, right, bottom = _parse_box(raw.get("box"), f"{where}.box")
        page_idx = raw.get("page", 0)
        line_idx = raw.get("line")
        _require(
            isinstance(page_idx, int) and not isinstance(page_idx, bool) and page_idx >= 0,
            where,
            "'page' must be a non-negative integer",
        )
        _require(
            isinstance(line_idx, int) and not isinstance(line_idx, bool),
            where,
            "missing or non-integer 'line'",
        )
        max_page = max(max_page, page_idx)
        entry = lines.setdefault(
            (page_idx, line_idx),
            {"texts": [], "left": left, "top": top, "right": right, "bottom": bottom},
        )
        entry["texts"].append(text.strip())
        entry["left"] = min(entry["left"], left)
        entry["top"] = min(entry["top"], top)
        entry["right"] = max(entry["right"], right)
        entry["bottom"] = max(entry["bottom"], bottom)

    per_page: dict[int, list[TextBox]] = {p: [] for p in range(max_page + 1)}
    for (page_idx, line_idx), entry in lines.items():
        boxes = per_page[page_idx]
        boxes.append(
            TextBox(
                text=" ".join(entry["texts"]),
                left=entry["left"],
                top=entry["top"],
                right=entry["right"],
                bottom=entry["bottom"],
                reading_index=len(boxes),
                line_id=line_idx,
            )
        )

    pages = tuple(Page(boxes=tuple(per_page[p])) for p in range(max_page + 1))
    return OcrDocument(doc_id=doc_id, pages=pages, source="due")


def load_lines_fallback(doc: OcrDocument) -> list[str]:
    """Text lines of a document, across pages in page order.

    Pages where every box carries a line_id yield one string per OCR line
    (first-appearance order, words space-joined in reading order). Pages
    without full line information fall back to visual row grouping.
    """
    lines: list[str] = []
    for page in doc.pages:
        lines.extend(_page_lines(page))
    return lines


def _page_lines(page: Page) -> list[str]:
    if not page.boxes:
        return []
    if all(box.line_id is not None for box in page.boxes):
        by_line: dict[int, list[TextBox]] = {}
        for box in sorted(page.boxes, key=lambda b: b.reading_index):
            by_line.setdefault(box.line_id, []).append(box)
        return [" ".join(b.text for b in boxes) for boxes in by_line.values()]
    return [" ".join(b.text for b in row) for row in group_rows(page)]
