"""Controlled degradation of OCR geometry and reading order.

Four models: NONE (identity), TRANSLATE (per-box random shift), SHUFFLE
(random permutation) and NEAREST_NEIGHBOR (a deterministic reordering that
chains vertically adjacent boxes, emulating the column-wise reading order
some commercial OCR engines produce on tables).

Randomness comes from SplitMix64, a fixed 64-bit generator, so a seed
reproduces bit-identically on any platform or implementation. Integer
draws use rejection sampling to avoid modulo bias.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, replace

from .model import CharMetrics, OcrDocument, Page, TextBox

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 PRNG (Steele, Lea & Flood's mix function).

    state' = state + 0x9E3779B97F4A7C15
    z = state'; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
    z = (z ^ z>>27) * 0x94D049BB133111EB; output = z ^ z>>31
    """

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            draw = self.next_u64()
            if draw < limit:
                return draw % n

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high], inclusive on both ends."""
        return low + self.below(high - low + 1)


class NoiseModelId(enum.Enum):
    NONE = "NONE"
    TRANSLATE = "TRANSLATE"
    SHUFFLE = "SHUFFLE"
    NEAREST_NEIGHBOR = "NEAREST_NEIGHBOR"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class NoiseConfig:
    """Which model to apply and the knobs it needs.

    ``seed`` is fixed per run for reproducibility. ``translate_max`` bounds
    the per-box shift of TRANSLATE. The character-cell thresholds of
    NEAREST_NEIGHBOR default to the document's derived metrics and can be
    pinned here.
    """

    model: NoiseModelId = NoiseModelId.NONE
    seed: int = 0
    translate_max: int = 20
    min_char_width: float | None = None
    min_char_height: float | None = None

    def __post_init__(self) -> None:
        if self.translate_max < 0:
            raise ValueError("translate_max must be >= 0")


def document_seed(seed: int, doc_id: str) -> int:
    """Per-document sub-seed so parallel runs are order-independent.

    Defined as the first 8 bytes (big-endian) of
    SHA-256(seed as 8-byte big-endian || doc_id as UTF-8).
    """
    digest = hashlib.sha256(
        (seed & _MASK64).to_bytes(8, "big") + doc_id.encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def apply_none(page: Page) -> Page:
    """Identity: coordinates and text untouched."""
    return page


def apply_translate(page: Page, cfg: NoiseConfig, rng: SplitMix64 | None = None) -> Page:
    """Shift each box by an integer (dx, dy) uniform in [-max, +max].

    The shift applies to both edges, so width and height never change. A
    shift that would push an edge below zero is reduced to keep the whole
    box in-bounds. Per box, dx is drawn before dy.
    """
    if rng is None:
        rng = SplitMix64(cfg.seed)
    boxes = []
    grew_right = 0
    grew_bottom = 0
    for box in page.boxes:
        dx = rng.randint(-cfg.translate_max, cfg.translate_max)
        dy = rng.randint(-cfg.translate_max, cfg.translate_max)
        dx = max(dx, -box.left)
        dy = max(dy, -box.top)
        moved = box.shifted(dx, dy)
        grew_right = max(grew_right, moved.right)
        grew_bottom = max(grew_bottom, moved.bottom)
        boxes.append(moved)
    # Declared page extent grows if a box was pushed past it.
    width = None if page.width is None else max(page.width, grew_right)
    height = None if page.height is None else max(page.height, grew_bottom)
    return Page(boxes=tuple(boxes), width=width, height=height)


def _reindexed(boxes: list[TextBox]) -> tuple[TextBox, ...]:
    return tuple(
        replace(box, reading_index=i) for i, box in enumerate(boxes)
    )


def apply_shuffle(page: Page, cfg: NoiseConfig, rng: SplitMix64 | None = None) -> Page:
    """Uniformly random permutation of the boxes (Fisher-Yates).

    Geometry and text are untouched; reading_index is reassigned to the
    new positions.
    """
    if rng is None:
        rng = SplitMix64(cfg.seed)
    boxes = list(page.boxes)
    for i in range(len(boxes) - 1, 0, -1):
        j = rng.below(i + 1)
        boxes[i], boxes[j] = boxes[j], boxes[i]
    return Page(boxes=_reindexed(boxes), width=page.width, height=page.height)


def apply_nearest_neighbor(
    page: Page, cfg: NoiseConfig, metrics: CharMetrics
) -> Page:
    """Greedy chain reordering emulating column-wise OCR reading order.

    Starting from the box with the lowest original index, the successor of
    the current box is the unique unvisited box strictly below it with a
    vertical gap under min_char_height and a left-edge offset under
    min_char_width. With zero or multiple such candidates the chain falls
    back to the unvisited box with the lowest original index. On tables
    whose row gap is below min_char_height and whose column gap exceeds
    min_char_width this walks columns instead of rows.
    """
    min_char_width = (
        cfg.min_char_width if cfg.min_char_width is not None else metrics.char_width
    )
    min_char_height = (
        cfg.min_char_height if cfg.min_char_height is not None else metrics.char_height
    )

    remaining = list(range(len(page.boxes)))
    order: list[int] = []
    current: int | None = None
    while remaining:
        if current is None:
            nxt = remaining[0]
        else:
            cur_box = page.boxes[current]
            candidates = []
            for idx in remaining:
                box = page.boxes[idx]
                gap = box.top - cur_box.bottom
                if 0 < gap < min_char_height and abs(box.left - cur_box.left) < min_char_width:
                    candidates.append(idx)
            nxt = candidates[0] if len(candidates) == 1 else remaining[0]
        order.append(nxt)
        remaining.remove(nxt)
        current = nxt

    boxes = [page.boxes[i] for i in order]
    return Page(boxes=_reindexed(boxes), width=page.width, height=page.height)


def apply_noise(
    doc: OcrDocument, cfg: NoiseConfig, metrics: CharMetrics | None = None
) -> OcrDocument:
    """Apply a noise model to every page of a document.

    The RNG is seeded from (cfg.seed, doc.doc_id) and threaded through the
    pages in order, so a document's noise never depends on which other
    documents were processed before it.
    """
    if cfg.model is NoiseModelId.NONE:
        return doc
    rng = SplitMix64(document_seed(cfg.seed, doc.doc_id))
    if cfg.model is NoiseModelId.TRANSLATE:
        pages = tuple(apply_translate(page, cfg, rng) for page in doc.pages)
    elif cfg.model is NoiseModelId.SHUFFLE:
        pages = tuple(apply_shuffle(page, cfg, rng) for page in doc.pages)
    elif cfg.model is NoiseModelId.NEAREST_NEIGHBOR:
        if metrics is None and (cfg.min_char_width is None or cfg.min_char_height is None):
            from .model import derive_char_metrics

            metrics = derive_char_metrics(doc)
        if metrics is None:
            metrics = CharMetrics(cfg.min_char_width, cfg.min_char_height)
        pages = tuple(apply_nearest_neighbor(page, cfg, metrics) for page in doc.pages)
    else:
        raise ValueError(f"unknown noise model {cfg.model!r}")
    return OcrDocument(doc_id=doc.doc_id, pages=pages, source=doc.source, html=doc.html)
