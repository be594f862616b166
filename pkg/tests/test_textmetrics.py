import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from posterscore.errors import SchemaError
from posterscore.textmetrics import (
    TextCase,
    bag_of_chars_cosine,
    levenshtein,
    normalized_levenshtein_sim,
    phrase_f1,
    phrase_set,
    text_row,
)

short = st.text(alphabet="abc促销新品", max_size=8)


def test_phrase_f1_examples():
    assert phrase_f1(["限时特惠", "包邮"], ["包邮", "限时特惠"]) == 1.0
    assert phrase_f1(["A", "B"], ["A", "C"]) == pytest.approx(0.5)
    assert phrase_f1(["A"], []) == 0.0
    assert phrase_f1([], []) == 1.0


def test_phrase_normalization():
    assert phrase_set([" ABC ", "abc", "", "  "]) == frozenset({"abc"})
    # NFC: decomposed e + combining acute equals precomposed é
    assert phrase_f1(["cafe\u0301"], ["CAF\u00c9"]) == 1.0


@given(st.lists(short), st.lists(short))
def test_phrase_f1_symmetric(a, b):
    assert phrase_f1(a, b) == pytest.approx(phrase_f1(b, a))


def test_bag_of_chars_examples():
    assert bag_of_chars_cosine("新品上市", "新品上市") == pytest.approx(1.0)
    assert bag_of_chars_cosine("促销", "销促") == pytest.approx(1.0)
    assert bag_of_chars_cosine("abc", "abd") == pytest.approx(2 / 3, abs=1e-12)
    assert bag_of_chars_cosine("", "") == 1.0
    assert bag_of_chars_cosine("", "a") == 0.0
    assert bag_of_chars_cosine("a b", "ab") == pytest.approx(1.0)


def test_levenshtein_sim_examples():
    assert normalized_levenshtein_sim("abc", "abc") == 1.0
    assert normalized_levenshtein_sim("abc", "abd") == pytest.approx(2 / 3, abs=1e-12)
    assert normalized_levenshtein_sim("", "abcd") == 0.0
    assert normalized_levenshtein_sim("", "") == 1.0


@given(short, short)
def test_symmetry(a, b):
    assert bag_of_chars_cosine(a, b) == pytest.approx(bag_of_chars_cosine(b, a))
    assert normalized_levenshtein_sim(a, b) == normalized_levenshtein_sim(b, a)


@given(short, short)
def test_levenshtein_sim_one_iff_equal(a, b):
    sim = normalized_levenshtein_sim(a, b)
    assert (sim == 1.0) == (a == b)


@given(short, short, short)
def test_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def test_levenshtein_matches_oracle():
    rng = random.Random(3)
    alphabet = "ab促销"
    for _ in range(200):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        assert levenshtein(a, b) == oracles.levenshtein(a, b)


def test_text_case_and_row():
    c1 = TextCase("c2", "m", ("A", "B"), ("A", "C"), "abc", "abd")
    c2 = TextCase("c1", "m", ("x",), ("x",), "促销", "销促")
    row = text_row([c1, c2])
    assert row["n"] == 2
    assert row["phrase_f1"] == pytest.approx((0.5 + 1.0) / 2)
    assert row["char_sim"] == pytest.approx((2 / 3 + 1.0) / 2)
    assert row["lev_sim"] == pytest.approx((2 / 3 + 0.0) / 2)
    with pytest.raises(SchemaError):
        TextCase.from_dict({"case_id": "x"})
