import pytest
from hypothesis import given, strategies as st

from artin_relhyp.words import (
    EMPTY,
    INF,
    GroupSpec,
    Word,
    concat,
    cyclic_reduce,
    format_word,
    free_reduce,
    invert,
    is_cyclically_reduced,
    parse_word,
    subword,
    subwords,
)

letters = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=30)


def naive_reduce(seq):
    """Letter-level stack reduction, independent of the syllable code."""
    out = []
    for x in seq:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def test_free_reduce_examples():
    assert free_reduce([1, -1]) == EMPTY
    w = free_reduce([1, 2, -2, 1])
    assert w.syllables == ((1, 2),) and len(w) == 1
    w = free_reduce([1, 2, 1])
    assert w.syllables == ((1, 1), (2, 1), (1, 1)) and len(w) == 3


def test_free_reduce_rejects_bad_generator():
    with pytest.raises(ValueError):
        free_reduce([4], n=3)
    with pytest.raises(ValueError):
        free_reduce([0])


def test_cyclic_reduce_examples():
    assert cyclic_reduce(parse_word("a1 a2 a1^-1")) == (parse_word("a2"), parse_word("a1"))
    w = parse_word("a1 a2 a1")
    assert cyclic_reduce(w) == (w, EMPTY)
    assert cyclic_reduce(parse_word("a1^-1 a2 a2 a1")) == (parse_word("a2^2"), parse_word("a1^-1"))


def test_concat_invert_subwords():
    assert concat(parse_word("a1"), parse_word("a1^-1")) == EMPTY
    assert invert(Word([(1, 2), (2, -1)])).syllables == ((2, 1), (1, -2))
    subs = set(subwords(Word([(1, 3)])))
    assert {Word([(1, 1)]), Word([(1, 2)]), Word([(1, 3)])} <= subs
    with pytest.raises(IndexError):
        subword(Word([(1, 3)]), 2, 5)


def test_word_invariants():
    with pytest.raises(ValueError):
        Word([(1, 0)])
    with pytest.raises(ValueError):
        Word([(1, 1), (1, 2)])


def test_parse_and_format():
    w = parse_word("a3 a3^-2 a1^5")
    assert w.syllables == ((3, -1), (1, 5))
    assert format_word(EMPTY) == "1"
    assert parse_word("1") == EMPTY
    with pytest.raises(ValueError):
        parse_word("b2")
    with pytest.raises(ValueError):
        parse_word("a4", n=3)


def test_group_spec_flags():
    e7 = GroupSpec.uniform(3, 7)
    assert e7.is_extra_large and e7.is_theorem_scope and not e7.is_free
    mixed = GroupSpec(3, {(1, 2): 3, (1, 3): 7, (2, 3): 7})
    assert not mixed.is_extra_large and not mixed.is_theorem_scope
    free = GroupSpec(2, {})
    assert free.m(1, 2) is INF and free.is_free and free.is_theorem_scope
    assert GroupSpec(2, {(2, 1): 5}).m(1, 2) == 5
    with pytest.raises(ValueError):
        GroupSpec(2, {(1, 2): 1})
    with pytest.raises(ValueError):
        GroupSpec(2, {(1, 3): 7})


def test_infinity_ordering():
    assert INF > 10**9 and not INF < 3 and repr(INF) == "inf"


@given(letters)
def test_free_reduce_matches_naive(seq):
    assert free_reduce(seq).letters() == naive_reduce(seq)


@given(letters)
def test_free_reduce_idempotent_and_inverse(seq):
    w = free_reduce(seq)
    assert free_reduce(w.letters()) == w
    assert concat(w, invert(w)) == EMPTY


@given(letters, letters)
def test_lengths_subadditive(a, b):
    u, v = free_reduce(a), free_reduce(b)
    uv = concat(u, v)
    assert len(uv) <= len(u) + len(v)
    assert uv.letter_length <= u.letter_length + v.letter_length


@given(letters)
def test_cyclic_reduce_properties(seq):
    w = free_reduce(seq)
    core, conj = cyclic_reduce(w)
    assert concat(conj, core, invert(conj)) == w
    assert is_cyclically_reduced(core)
    assert cyclic_reduce(core) == (core, EMPTY)


@given(letters)
def test_format_parse_roundtrip(seq):
    w = free_reduce(seq)
    assert parse_word(format_word(w)) == w
