"""Answer readout from model output: the 30-case oracle and properties.

Every EXPECTED value below was derived by hand from the readout rules:
scan for JSON objects, keep the one answering the most expected keys
(earliest on ties), read scalar answers, flag hallucinated keys and
nested values, produce nothing when no object parses.
"""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from layoutprompt.extraction import (
    DIAG_HALLUCINATED_KEY,
    DIAG_LENIENT_JSON,
    DIAG_MULTIPLE_OBJECTS,
    DIAG_NESTED_VALUE,
    DIAG_NO_JSON,
    extract_answers,
    find_json_objects,
    read_answers,
    select_object,
)


def codes(result):
    return {d.code for d in result.diagnostics}


class TestFindJsonObjects:
    def test_object_with_prose_around(self):
        assert find_json_objects('Here: {"0":"42"} done') == ['{"0":"42"}']

    def test_two_objects_in_order(self):
        out = find_json_objects('a {"x":1} b {"y":2} c')
        assert out == ['{"x":1}', '{"y":2}']

    def test_braces_inside_string_literal(self):
        assert find_json_objects('{"a":"b{c}"}') == ['{"a":"b{c}"}']

    def test_escaped_quote_inside_string(self):
        text = '{"a":"say \\"hi\\" {now}"}'
        assert find_json_objects(text) == [text]

    def test_nested_object_reported_once(self):
        text = '{"outer": {"inner": 1}}'
        assert find_json_objects(text) == [text]

    def test_unparsable_outer_exposes_inner(self):
        assert find_json_objects('{bad {"0":"a"} trailing') == ['{"0":"a"}']

    def test_no_objects(self):
        assert find_json_objects("no braces at all") == []

    def test_array_is_not_an_object(self):
        assert find_json_objects('[1, 2, 3]') == []

    def test_unterminated_brace(self):
        assert find_json_objects('{"a": "b"') == []


class TestSelectObject:
    def test_empty_list_gives_none(self):
        assert select_object([], {"0"}) is None

    def test_single_object_selected(self):
        assert select_object([{"0": "a"}], {"0", "1"}) == {"0": "a"}

    def test_most_answers_wins(self):
        objects = [{"0": "a"}, {"0": "a", "1": "b"}]
        assert select_object(objects, {"0", "1"}) == {"0": "a", "1": "b"}

    def test_tie_broken_by_earliest(self):
        objects = [{"0": "first"}, {"1": "second"}]
        assert select_object(objects, {"0", "1"}) == {"0": "first"}

    def test_unexpected_keys_do_not_count(self):
        objects = [{"0": "a"}, {"x": 1, "y": 2, "z": 3}]
        assert select_object(objects, {"0"}) == {"0": "a"}


class TestReadAnswers:
    def test_simple_answer(self):
        result = read_answers({"0": "RM 12.50"}, ["0"])
        assert result.answers == {"0": "RM 12.50"}
        assert result.diagnostics == []

    def test_hallucinated_key(self):
        result = read_answers({"price_of_green_tea": "3.00"}, ["answer"])
        assert result.answers == {"answer": None}
        assert codes(result) == {DIAG_HALLUCINATED_KEY}

    def test_nested_value(self):
        result = read_answers({"price": {"green_tea": "3.00"}}, ["price"])
        assert result.answers == {"price": None}
        assert codes(result) == {DIAG_NESTED_VALUE}

    def test_absent_object_all_empty(self):
        result = read_answers(None, ["a", "b"])
        assert result.answers == {"a": None, "b": None}

    def test_integer_stringified_without_decimal_point(self):
        assert read_answers({"0": 3}, ["0"]).answers["0"] == "3"

    def test_integral_float_stringified_without_decimal_point(self):
        assert read_answers({"0": 3.0}, ["0"]).answers["0"] == "3"

    def test_fractional_float(self):
        assert read_answers({"0": 2.5}, ["0"]).answers["0"] == "2.5"

    def test_booleans(self):
        result = read_answers({"0": True, "1": False}, ["0", "1"])
        assert result.answers == {"0": "true", "1": "false"}

    def test_null_is_explicit_empty(self):
        result = read_answers({"0": None}, ["0"])
        assert result.answers == {"0": None}
        assert result.diagnostics == []


# The 30-case oracle: (model output, expected keys, expected answers,
# expected diagnostic codes). Hand-derived per the readout rules.
ORACLE_CASES = [
    # -- single valid object ------------------------------------------------
    ('{"0": "42"}', ["0"], {"0": "42"}, set()),
    ('The answer is {"0": "42"} as requested.', ["0"], {"0": "42"}, set()),
    ('{"0": "a", "1": "b"}', ["0", "1"], {"0": "a", "1": "b"}, set()),
    ('{"company": "ACME", "date": "15/03/2018"}', ["company", "date"],
     {"company": "ACME", "date": "15/03/2018"}, set()),
    ('{"0": ""}', ["0"], {"0": ""}, set()),
    ('{"0": 7}', ["0"], {"0": "7"}, set()),
    ('{"0": 7.0}', ["0"], {"0": "7"}, set()),
    ('{"0": 7.25}', ["0"], {"0": "7.25"}, set()),
    ('{"0": true}', ["0"], {"0": "true"}, set()),
    ('{"0": null}', ["0"], {"0": None}, set()),
    # -- multiple objects: most answers wins, earliest breaks ties ----------
    ('{"0": "a"} {"0": "a", "1": "b"}', ["0", "1"],
     {"0": "a", "1": "b"}, {DIAG_MULTIPLE_OBJECTS}),
    ('{"0": "first"} {"1": "x"} {"0": "third"}', ["0"],
     {"0": "first"}, {DIAG_MULTIPLE_OBJECTS}),
    # hallucinated keys in *unselected* objects are not reported: only the
    # selected object is read
    ('{"junk": 1} {"0": "yes"}', ["0"], {"0": "yes"}, {DIAG_MULTIPLE_OBJECTS}),
    ('{"0": "a", "1": "b"} {"0": "c"}', ["0", "1"],
     {"0": "a", "1": "b"}, {DIAG_MULTIPLE_OBJECTS}),
    ('{} {"0": "v"}', ["0"], {"0": "v"}, {DIAG_MULTIPLE_OBJECTS}),
    # -- hallucinated keys (the classic wrong-key failure) -------------------
    ('{"price_of_green_tea": "3.00"}', ["answer"], {"answer": None},
     {DIAG_HALLUCINATED_KEY}),
    ('{"0": "ok", "extra": "x"}', ["0", "1"], {"0": "ok", "1": None},
     {DIAG_HALLUCINATED_KEY}),
    ('{"total_amount": "6.00", "0": "a"}', ["0"], {"0": "a"}, set()),
    # -- nested objects are failures, never flattened ------------------------
    ('{"price": {"green_tea": "3.00"}}', ["price"], {"price": None},
     {DIAG_NESTED_VALUE}),
    ('{"0": ["a", "b"]}', ["0"], {"0": None}, {DIAG_NESTED_VALUE}),
    ('{"0": {"deep": {"deeper": 1}}, "1": "flat"}', ["0", "1"],
     {"0": None, "1": "flat"}, {DIAG_NESTED_VALUE}),
    # -- braces inside strings ------------------------------------------------
    ('{"a": "b{c}"}', ["a"], {"a": "b{c}"}, set()),
    ('{"a": "open { only"}', ["a"], {"a": "open { only"}, set()),
    ('{"a": "quote \\" and } brace"}', ["a"], {"a": 'quote " and } brace'}, set()),
    # -- no JSON at all: no answer is generated -------------------------------
    ('Sorry, I cannot answer that.', ["0"], {"0": None}, {DIAG_NO_JSON}),
    ('', ["0"], {"0": None}, {DIAG_NO_JSON}),
    ('{"0": broken}', ["0"], {"0": None}, {DIAG_NO_JSON}),
    ('[{"not": "an object deep inside string"}]', ["not"],
     {"not": "an object deep inside string"}, set()),
    # -- lenient second pass ---------------------------------------------------
    ("{'0': 'single quotes'}", ["0"], {"0": "single quotes"}, {DIAG_LENIENT_JSON}),
    ('{"0": "trailing",}', ["0"], {"0": "trailing"}, {DIAG_LENIENT_JSON}),
]


class TestExtractionOracle:
    @pytest.mark.parametrize("output,keys,answers,diag", ORACLE_CASES)
    def test_case(self, output, keys, answers, diag):
        result = extract_answers(output, keys)
        assert result.answers == answers
        assert codes(result) == diag

    def test_oracle_has_thirty_cases(self):
        assert len(ORACLE_CASES) == 30


class TestRoundTrip:
    @given(st.dictionaries(
        st.sampled_from(["0", "1", "2", "company", "date", "total"]),
        st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30),
        min_size=1,
    ))
    def test_well_formed_output_round_trips(self, answers):
        rendered = json.dumps(answers, ensure_ascii=False)
        result = extract_answers(rendered, list(answers))
        assert result.answers == answers

    @given(st.text(max_size=300))
    def test_never_raises_on_arbitrary_text(self, text):
        result = extract_answers(text, ["0", "1"])
        assert set(result.answers) == {"0", "1"}

    def test_serialization_round_trip(self):
        result = extract_answers('{"0": "x"} {"1": "y"}', ["0", "1"])
        record = json.loads(json.dumps(result.to_record()))
        from layoutprompt.extraction import ExtractionResult

        restored = ExtractionResult.from_record(record)
        assert restored.answers == result.answers
        assert codes(restored) == codes(result)
