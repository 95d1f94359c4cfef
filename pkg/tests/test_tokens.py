"""Token counting and per-verbalizer overhead ratios."""

import sys
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from layoutprompt.errors import EmptyCorpus, ZeroBaseline
from layoutprompt.tokens import (
    ApproximateCounter,
    OverheadReport,
    SubprocessCounter,
    corpus_overhead,
    overhead,
)
from layoutprompt.verbalize import VerbalizerId

from conftest import box, doc_of, page_of, single_box_doc

SERVER = Path(__file__).parent.parent / "scripts" / "token_counter_server.py"


class TestApproximateCounter:
    def test_empty_is_zero(self):
        assert ApproximateCounter().count("") == 0

    @pytest.mark.parametrize("text,expected", [
        ("hello", 1),
        ("hello world", 2),
        ("left:100", 3),             # word, colon, number
        ("<box x=1/>", 7),           # <, box, x, =, 1, /, >
        ("a\nb\tc", 3),
        ("...", 3),
    ])
    def test_counts(self, text, expected):
        assert ApproximateCounter().count(text) == expected

    @given(st.text(max_size=40), st.text(max_size=40))
    def test_concatenation_monotonicity(self, a, b):
        counter = ApproximateCounter()
        assert counter.count(a + b) <= counter.count(a) + counter.count(b) + 1


class ScriptedCounter:
    """Returns pre-assigned counts for exact texts."""

    def __init__(self, table):
        self.table = table

    def count(self, text):
        return self.table[text]


class TestOverhead:
    def test_plain_text_ratio_is_one(self, ref_box_doc):
        assert overhead(ref_box_doc, VerbalizerId.PlainText, ApproximateCounter()) == 1.0

    def test_coordinate_verbalizers_exceed_one(self, ref_box_doc):
        counter = ApproximateCounter()
        for verbalizer in (
            VerbalizerId.BoundingBox,
            VerbalizerId.BoundingBoxMarkup,
            VerbalizerId.CenterPoint,
        ):
            assert overhead(ref_box_doc, verbalizer, counter) > 1.0

    def test_empty_document_raises_zero_baseline(self):
        with pytest.raises(ZeroBaseline):
            overhead(doc_of(page_of()), VerbalizerId.PlainText, ApproximateCounter())


class TestCorpusOverhead:
    def test_single_doc_equals_per_doc_overhead(self, ref_box_doc):
        counter = ApproximateCounter()
        report = corpus_overhead([ref_box_doc], counter)
        for verbalizer in report.mean_ratio:
            assert report.mean_ratio[verbalizer] == pytest.approx(
                overhead(ref_box_doc, VerbalizerId(verbalizer), counter))

    def test_mean_of_ratios(self):
        doc1 = single_box_doc("ab", 0, 0, 20, 10)
        doc2 = single_box_doc("cd", 5, 5, 25, 15)
        counter = ScriptedCounter({
            "ab": 10,
            "cd": 10,
            "left:0 top:0 right:20 bottom:10 text:'ab'": 10,   # ratio 1.0
            "left:5 top:5 right:25 bottom:15 text:'cd'": 30,   # ratio 3.0
        })
        report = corpus_overhead(
            [doc1, doc2], counter, verbalizers=(VerbalizerId.BoundingBox,))
        assert report.mean_ratio["BoundingBox"] == pytest.approx(2.0)

    def test_ranking_sorted_ascending_by_mean(self, ref_box_doc):
        report = corpus_overhead([ref_box_doc], ApproximateCounter())
        means = [report.mean_ratio[name] for name in report.ranking]
        assert means == sorted(means)

    def test_empty_corpus_raises(self):
        with pytest.raises(EmptyCorpus):
            corpus_overhead([doc_of(page_of())], ApproximateCounter())

    def test_doc_id_is_irrelevant(self, ref_box_doc):
        renamed = doc_of(*ref_box_doc.pages, doc_id="other")
        counter = ApproximateCounter()
        assert (
            corpus_overhead([ref_box_doc], counter).mean_ratio
            == corpus_overhead([renamed], counter).mean_ratio
        )


class TestSubprocessAdapter:
    def test_matches_in_process_counter(self):
        texts = [
            "hello world",
            "",
            "line one\nline two\nline three",
            "unicode: straße ÷ 2",
            "x " * 500,
        ]
        approx = ApproximateCounter()
        with SubprocessCounter([sys.executable, str(SERVER), "--mode", "approx"]) as remote:
            for text in texts:
                assert remote.count(text) == approx.count(text)

    def test_many_requests_over_one_process(self):
        approx = ApproximateCounter()
        with SubprocessCounter([sys.executable, str(SERVER)]) as remote:
            for i in range(50):
                text = f"request {i} " * (i % 7)
                assert remote.count(text) == approx.count(text)
