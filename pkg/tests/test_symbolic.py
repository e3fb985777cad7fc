import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circleskew import Cylinder, PeriodicSeq, Word, product_metric, seq_metric, word_concat, word_power
from circleskew.symbolic import cylinder_depth, first_difference

words = st.lists(st.integers(1, 3), min_size=1, max_size=12).map(Word)
any_words = st.lists(st.integers(1, 3), max_size=12).map(Word)


def seq(*symbols):
    return PeriodicSeq(Word(symbols))


def test_concat_and_power_examples():
    assert list(word_concat(Word([1, 2]), Word([3]))) == [1, 2, 3]
    assert len(word_power(Word([1, 2]), 0)) == 0
    assert list(word_power(Word([2]), 3)) == [2, 2, 2]
    assert Word([1, 2]) + Word([3]) == Word([1, 2, 3])
    with pytest.raises(ValueError):
        word_power(Word([1]), -1)


@given(any_words, any_words, st.integers(0, 5))
def test_lengths_add_and_multiply(a, b, n):
    assert len(a + b) == len(a) + len(b)
    assert len(a * n) == n * len(a)


def test_word_symbols_validated():
    with pytest.raises(ValueError):
        Word([0, 1])
    with pytest.raises(ValueError):
        Word([1, 3], k=2)


@given(any_words)
def test_string_round_trip(w):
    assert Word.from_string(w.to_string()) == w


def test_shortlex_order():
    assert Word([2]) < Word([1, 1]) and Word([1, 1]) < Word([1, 2])


@pytest.mark.parametrize("a, b, d", [
    (seq(1, 2), seq(1, 2), 0.0),
    (seq(1), seq(2), 1.0),
    (seq(1, 2), seq(1, 2, 1, 2, 1, 1), 2.0 ** -5),
])
def test_seq_metric_examples(a, b, d):
    assert seq_metric(a, b) == d


def test_equal_as_infinite_sequences():
    assert seq_metric(seq(1, 2), seq(1, 2, 1, 2)) == 0.0
    assert first_difference(seq(1, 2), seq(2, 1), offset_a=1) is None


@given(words, words, words)
def test_seq_metric_is_ultrametric(a, b, c):
    a, b, c = PeriodicSeq(a), PeriodicSeq(b), PeriodicSeq(c)
    assert seq_metric(a, c) <= max(seq_metric(a, b), seq_metric(b, c))
    assert seq_metric(a, b) == seq_metric(b, a)


def test_product_metric_examples():
    s = seq(1, 2)
    assert product_metric((s, 0.3), (s, 0.3)) == 0.0
    assert product_metric((s, 0.1), (s, 0.2)) == pytest.approx(0.1)
    assert product_metric((seq(1), 0.4), (seq(2), 0.4)) == 1.0


@given(words, words, st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_product_metric_bounded_by_one(a, b, x, y):
    assert product_metric((PeriodicSeq(a), x), (PeriodicSeq(b), y)) <= 1.0


@given(words, st.integers(0, 30))
def test_cylinder_contains_its_repetition(w, n):
    ps = PeriodicSeq(w)
    assert Cylinder(w).contains(ps)
    assert Cylinder(Word(ps.prefix(n))).contains(ps)


def test_shift_and_window():
    s = seq(1, 2, 3)
    assert list(s.shift(1).word) == [2, 3, 1]
    assert s.window(2, 4).tolist() == [3, 1, 2, 3]
    assert s[7] == 2


def test_empty_periodic_sequence_rejected():
    with pytest.raises(ValueError):
        PeriodicSeq(Word())


@pytest.mark.parametrize("eta, depth", [(2.0, 1), (1.0, 1), (0.5, 1), (0.3, 2), (0.25, 2), (0.01, 7)])
def test_cylinder_depth(eta, depth):
    assert cylinder_depth(eta) == depth
    assert 2.0 ** -depth <= eta or depth == 1
