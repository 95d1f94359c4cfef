"""Document model: geometry validation, char metrics, row grouping."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from layoutprompt.errors import EmptyDocument, GeometryError
from layoutprompt.model import (
    CharMetrics,
    OcrDocument,
    Page,
    TextBox,
    center,
    derive_char_metrics,
    group_rows,
    round_half_up,
)

from conftest import box, doc_of, page_of, random_scatter_page, single_box_doc


class TestTextBox:
    def test_rejects_zero_area(self):
        with pytest.raises(GeometryError):
            box("x", 10, 10, 10, 20)
        with pytest.raises(GeometryError):
            box("x", 10, 20, 30, 20)

    def test_rejects_blank_text(self):
        with pytest.raises(GeometryError):
            box("   ", 0, 0, 10, 10)

    def test_rejects_negative_coordinates(self):
        with pytest.raises(GeometryError):
            box("x", -1, 0, 10, 10)

    def test_width_height(self):
        b = box("x", 3, 4, 10, 6)
        assert (b.width, b.height) == (7, 2)

    def test_page_requires_contiguous_reading_indices(self):
        with pytest.raises(GeometryError):
            page_of(box("a", 0, 0, 5, 5, reading_index=0),
                    box("b", 10, 0, 15, 5, reading_index=2))

    def test_page_extent_derived_from_boxes(self):
        page = page_of(box("a", 0, 0, 50, 20), box("b", 60, 30, 90, 55, 1))
        assert page.extent == (90, 55)

    def test_declared_extent_must_contain_boxes(self):
        with pytest.raises(GeometryError):
            page_of(box("a", 0, 0, 50, 20), width=40)

    def test_document_needs_a_page(self):
        with pytest.raises(GeometryError):
            OcrDocument(doc_id="d", pages=())


class TestRounding:
    @pytest.mark.parametrize("value,expected", [
        (210.5, 211), (75.0, 75), (7.5, 8), (3.5, 4), (2.4, 2), (2.6, 3), (0.5, 1),
    ])
    def test_half_up(self, value, expected):
        assert round_half_up(value) == expected


class TestCenter:
    def test_reference_box(self):
        assert center(box("TAX INVOICE", 100, 50, 321, 100)) == (211, 75)

    def test_unit_square(self):
        assert center(box("x", 0, 0, 10, 10)) == (5, 5)

    def test_half_coordinates_round_up(self):
        assert center(box("x", 7, 3, 8, 4)) == (8, 4)

    @given(st.integers(0, 5000), st.integers(0, 5000), st.integers(1, 400),
           st.integers(1, 400), st.integers(0, 300), st.integers(0, 300))
    def test_translation_equivariance(self, left, top, w, h, dx, dy):
        b = box("x", left, top, left + w, top + h)
        cx, cy = center(b)
        sx, sy = center(b.shifted(dx, dy))
        assert (sx, sy) == (cx + dx, cy + dy)


class TestCharMetrics:
    def test_reference_box(self):
        metrics = derive_char_metrics(single_box_doc("TAX INVOICE", 100, 50, 321, 100))
        assert metrics.char_width == pytest.approx(221 / 11)
        assert metrics.char_height == 50

    def test_duplicate_boxes_same_metrics(self):
        one = single_box_doc("TAX INVOICE", 100, 50, 321, 100)
        two = doc_of(page_of(
            box("TAX INVOICE", 100, 50, 321, 100, 0),
            box("TAX INVOICE", 100, 50, 321, 100, 1),
        ))
        assert derive_char_metrics(two) == derive_char_metrics(one)

    def test_median_of_three_widths(self):
        # widths per char 10, 20, 30 for single-char texts
        doc = doc_of(page_of(
            box("a", 0, 0, 10, 10, 0),
            box("b", 20, 0, 40, 10, 1),
            box("c", 50, 0, 80, 10, 2),
        ))
        assert derive_char_metrics(doc).char_width == 20

    def test_empty_document_raises(self):
        with pytest.raises(EmptyDocument):
            derive_char_metrics(doc_of(page_of()))

    def test_invariant_under_reordering(self):
        rng = random.Random(7)
        page = random_scatter_page(rng)
        doc = doc_of(page)
        shuffled = list(page.boxes)
        rng.shuffle(shuffled)
        reordered = doc_of(page_of(*(
            TextBox(text=b.text, left=b.left, top=b.top, right=b.right,
                    bottom=b.bottom, reading_index=i)
            for i, b in enumerate(shuffled)
        )))
        assert derive_char_metrics(reordered) == derive_char_metrics(doc)

    def test_rejects_nonpositive(self):
        with pytest.raises(GeometryError):
            CharMetrics(char_width=0, char_height=10)


class TestGroupRows:
    def test_strong_overlap_is_one_row(self):
        rows = group_rows(page_of(
            box("a", 0, 50, 40, 100, 0), box("b", 60, 55, 90, 105, 1)))
        assert [[b.text for b in row] for row in rows] == [["a", "b"]]

    def test_disjoint_intervals_are_two_rows(self):
        rows = group_rows(page_of(
            box("a", 0, 0, 40, 20, 0), box("b", 0, 100, 40, 120, 1)))
        assert [[b.text for b in row] for row in rows] == [["a"], ["b"]]

    def test_transitive_closure_chains_rows(self):
        # A-B and B-C each overlap by >= half the smaller height; A-C do not.
        rows = group_rows(page_of(
            box("a", 0, 0, 40, 20, 0),
            box("b", 50, 10, 90, 30, 1),
            box("c", 100, 20, 140, 40, 2),
        ))
        assert [[b.text for b in row] for row in rows] == [["a", "b", "c"]]

    def test_just_below_half_overlap_splits(self):
        # overlap 9 < 10 = half of the 20px boxes
        rows = group_rows(page_of(
            box("a", 0, 0, 40, 20, 0), box("b", 50, 11, 90, 31, 1)))
        assert len(rows) == 2

    def test_row_orders_by_left_then_reading_index(self):
        rows = group_rows(page_of(
            box("b", 50, 0, 80, 20, 0),
            box("a", 0, 2, 30, 22, 1),
            box("tie2", 100, 1, 130, 21, 3),
            box("tie1", 100, 1, 131, 21, 2),
        ))
        assert [b.text for b in rows[0]] == ["a", "b", "tie1", "tie2"]

    def test_empty_page(self):
        assert group_rows(page_of()) == []

    @given(st.integers(0, 2**32 - 1))
    def test_partition_property(self, seed):
        page = random_scatter_page(random.Random(seed))
        rows = group_rows(page)
        flattened = [b for row in rows for b in row]
        assert sorted(flattened, key=lambda b: b.reading_index) == sorted(
            page.boxes, key=lambda b: b.reading_index)
        assert len(flattened) == len(page.boxes)
