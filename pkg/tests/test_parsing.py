import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import any_vectors
from posterscore.errors import GeneratorError
from posterscore.parsing import RetryPolicy, Verdict, attempt_parse, format_output, parse_output
from posterscore.scores import ScoreVector

GOOD = '<think>ok</think><answer>{"object":4.0,"background":3.5,"text":2.0,"layout":4.5,"overall":3.5}</answer>'


def test_well_formed():
    out = parse_output(GOOD)
    assert out.verdict is Verdict.VALID
    assert out.think == "ok"
    assert out.scores == ScoreVector(4.0, 3.5, 2.0, 4.5, 3.5)


def test_missing_answer_block():
    out = parse_output("<think>…</think> no answer block")
    assert out.verdict is Verdict.INVALID_STRUCTURE
    assert out.scores is None and out.answer_json is None


def test_missing_key_is_schema_error():
    out = parse_output('<answer>{"object":4,"background":3.5,"text":2,"overall":3.5}</answer>')
    assert out.verdict is Verdict.INVALID_SCHEMA
    assert out.answer_json == {"object": 4, "background": 3.5, "text": 2, "overall": 3.5}


@pytest.mark.parametrize(
    "raw, verdict",
    [
        ("", Verdict.INVALID_STRUCTURE),
        ("<answer>{...}", Verdict.INVALID_STRUCTURE),
        ("<answer>{'object': 4}</answer>", Verdict.INVALID_JSON),
        ("<answer></answer>", Verdict.INVALID_JSON),
        ('<answer>{"object": NaN, "background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.INVALID_JSON),
        ("<answer>[1, 2, 3, 4, 5]</answer>", Verdict.INVALID_SCHEMA),
        ('<answer>{"object":"4.0","background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.INVALID_SCHEMA),
        ('<answer>{"object":true,"background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.INVALID_SCHEMA),
        ('<answer>{"object":3,"Object":4,"background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.INVALID_SCHEMA),
        ('<answer>{"object":5.5,"background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.OUT_OF_RANGE_SCORE),
        ('<answer>{"object":0,"background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.OUT_OF_RANGE_SCORE),
        ('<answer>{"object":1e999,"background":3,"text":3,"layout":3,"overall":3}</answer>', Verdict.OUT_OF_RANGE_SCORE),
    ],
)
def test_verdict_classes(raw, verdict):
    assert parse_output(raw).verdict is verdict


def test_keys_case_insensitive_and_trimmed_extra_keys_ignored():
    raw = '<answer>\n{" Object ":4,"BACKGROUND":3,"text":2,"layout":5,"overall":3, "reason": "x"}\n</answer>'
    out = parse_output(raw)
    assert out.verdict is Verdict.VALID
    assert out.scores == ScoreVector(4, 3, 2, 5, 3)


def test_first_block_wins():
    second = GOOD.replace("4.0", "1.0")
    out = parse_output(GOOD + "\n" + second)
    assert out.scores.object == 4.0
    bad_first = '<answer>{"object": 9}</answer>' + GOOD
    assert parse_output(bad_first).verdict is Verdict.INVALID_SCHEMA


def test_think_optional_and_whitespace_insignificant():
    raw = '\n\n  <answer>  {"object":2,"background":2,"text":2,"layout":2,"overall":2}  </answer>\n'
    out = parse_output(raw)
    assert out.valid and out.think is None


def test_bytes_input():
    assert parse_output(GOOD.encode()).valid
    assert parse_output(b"\xff\xfe<answer>").verdict is Verdict.INVALID_STRUCTURE


def test_deep_nesting_does_not_crash():
    raw = "<answer>" + "[" * 100000 + "]" * 100000 + "</answer>"
    assert parse_output(raw).verdict in (Verdict.INVALID_JSON, Verdict.INVALID_SCHEMA)


@given(any_vectors)
def test_round_trip(v):
    out = parse_output(format_output(v, think="因为..."))
    assert out.valid and out.scores == v
    again = parse_output(format_output(out.scores))
    assert again.scores == out.scores


@settings(max_examples=300)
@given(st.binary(max_size=200) | st.text(max_size=200))
def test_totality(raw):
    out = parse_output(raw)
    assert isinstance(out.verdict, Verdict)
    assert (out.verdict is Verdict.VALID) == (out.scores is not None)
    assert parse_output(raw) == out


def _gen(texts):
    it = iter(texts)
    calls = []

    def g():
        calls.append(1)
        return next(it)

    return g, calls


def test_attempt_valid_first():
    g, calls = _gen([GOOD, GOOD])
    out, used = attempt_parse(g)
    assert used == 1 and out.valid and len(calls) == 1


def test_attempt_valid_third():
    g, _ = _gen(["junk", "<answer>{}</answer>", GOOD])
    out, used = attempt_parse(g, RetryPolicy(3))
    assert used == 3 and out.valid


def test_attempt_exhausted():
    g, calls = _gen(["a", "b", "c", GOOD])
    out, used = attempt_parse(g, RetryPolicy(3))
    assert used == 3 and not out.valid and len(calls) == 3
    assert out.raw == "c"


def test_generator_failure():
    def g():
        if not hasattr(g, "n"):
            g.n = 0
        g.n += 1
        if g.n == 2:
            raise TimeoutError("api down")
        return "junk"

    with pytest.raises(GeneratorError) as info:
        attempt_parse(g)
    assert info.value.attempts == 2
    assert isinstance(info.value.__cause__, TimeoutError)


def test_retry_policy_validation():
    assert RetryPolicy().max_attempts == 3
    with pytest.raises(ValueError):
        RetryPolicy(0)


def test_answer_json_exposed():
    out = parse_output(GOOD)
    assert json.dumps(out.answer_json)
