import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artin_relhyp.acceptance import (
    E7,
    MIXED,
    random_relator_product,
    random_trivial_two_gen_word,
)
from artin_relhyp.artin import (
    NotExtraLargeError,
    abelian_image,
    dehn_solve,
    equal_in_G,
    find_violation,
    is_artin_reduced,
    is_strongly_artin_reduced,
    parabolic_intersection_check,
    replace_violation,
)
from artin_relhyp.dihedral import DihedralPair, build_relator, garside_nf, in_Rij
from artin_relhyp.words import (
    EMPTY,
    GroupSpec,
    concat,
    free_reduce,
    invert,
    parse_word,
    power,
    syllable_subword,
)

P12 = DihedralPair(1, 2, 7)


def coxeter_image(w, spec):
    """Image in the Coxeter quotient under its geometric representation."""
    n = spec.n
    B = np.eye(n)
    for (i, j), m in spec.labels.items():
        B[i - 1, j - 1] = B[j - 1, i - 1] = -math.cos(math.pi / m)
    mats = []
    for i in range(n):
        s = np.eye(n)
        s[i, :] -= 2 * B[i, :]
        mats.append(s)
    out = np.eye(n)
    for x in w.letters():
        out = out @ mats[abs(x) - 1]  # reflections are involutions
    return out


def coxeter_trivial(w, spec):
    return np.allclose(coxeter_image(w, spec), np.eye(spec.n), atol=1e-8)


def letters3(max_len=16):
    return st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=max_len).map(free_reduce)


def test_coxeter_oracle_sanity():
    assert coxeter_trivial(build_relator(P12), E7)
    assert not coxeter_trivial(parse_word("a1"), E7)
    assert coxeter_trivial(parse_word("a1^2"), E7)


def test_violation_examples():
    r = build_relator(P12)
    # relator minus 3 syllables: a violation at k = 3
    v3 = syllable_subword(r, 0, len(r) - 4)
    viol = find_violation(v3, E7, 3)
    assert viol is not None and viol.pair == P12 and len(viol.completion) <= 3
    assert in_Rij(concat(viol.subword, viol.completion), P12)
    # relator minus 4 syllables: Artin-reduced but not strongly
    v4 = syllable_subword(r, 0, len(r) - 5)
    assert find_violation(v4, E7, 3) is None
    assert find_violation(v4, E7, 4) is not None
    assert is_artin_reduced(v4, E7) and not is_strongly_artin_reduced(v4, E7)
    # a short two-generator word is strongly reduced
    assert is_strongly_artin_reduced(parse_word("a1 a2 a1"), E7)


def test_replacement_preserves_element_and_shortens():
    r = build_relator(P12)
    w = concat(parse_word("a3"), syllable_subword(r, 0, len(r) - 2), parse_word("a3^2"))
    viol = find_violation(w, E7, 3)
    after = replace_violation(w, viol)
    assert len(after) < len(w)
    assert coxeter_trivial(concat(w, invert(after)), E7)


def test_dehn_examples():
    assert dehn_solve(EMPTY, E7).trivial
    assert dehn_solve(build_relator(P12), E7).trivial
    res = dehn_solve(parse_word("a1 a2 a3"), E7)
    assert not res.trivial and res.residual == parse_word("a1 a2 a3") and res.steps == 0
    g = parse_word("a3 a1^-2")
    res = dehn_solve(concat(g, build_relator(P12), invert(g)), E7)
    assert res.trivial and res.steps >= 1
    assert "trivial" in res.format_trace()
    assert res.records()[-1].startswith("result=trivial")


@pytest.mark.parametrize("spec", [E7, MIXED], ids=["E7", "mixed789"])
def test_dehn_on_relator_products(spec):
    rng = np.random.default_rng(7)
    for _ in range(200):
        w = random_relator_product(spec, rng)
        assert dehn_solve(w, spec).trivial


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([E7, MIXED]), letters3())
def test_dehn_sound_against_quotients(spec, w):
    res = dehn_solve(w, spec)
    if res.trivial:
        assert coxeter_trivial(w, spec)
        assert abelian_image(w, spec) == ()
    else:
        assert res.residual and is_artin_reduced(res.residual, spec)
        assert coxeter_trivial(concat(w, invert(res.residual)), spec)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([4, 5, 7]),
       st.lists(st.sampled_from([1, -1, 2, -2]), max_size=20).map(free_reduce))
def test_dehn_matches_garside_on_two_generators(m, w):
    spec = GroupSpec(2, {(1, 2): m})
    pair = DihedralPair(1, 2, m)
    assert dehn_solve(w, spec).trivial == garside_nf(w, pair).is_trivial


@pytest.mark.parametrize("m", [4, 5, 7])
def test_dehn_matches_garside_on_trivial_two_generator_words(m):
    spec = GroupSpec(2, {(1, 2): m})
    pair = DihedralPair(1, 2, m)
    rng = np.random.default_rng(m)
    for _ in range(100):
        w = random_trivial_two_gen_word(pair, rng, 4 * m)
        assert garside_nf(w, pair).is_trivial
        assert dehn_solve(w, spec).trivial


def test_equal_in_G():
    assert equal_in_G(parse_word("a1 a2 a1 a2 a1 a2 a1"), parse_word("a2 a1 a2 a1 a2 a1 a2"), E7)
    assert not equal_in_G(parse_word("a1 a2"), parse_word("a2 a1"), E7)
    assert not equal_in_G(power(1, 5), power(1, 4), E7)
    g = parse_word("a3 a2")
    assert equal_in_G(concat(g, build_relator(P12), invert(g), parse_word("a3")), parse_word("a3"), E7)
    free = GroupSpec(2, {})
    assert not equal_in_G(parse_word("a1 a2"), parse_word("a2 a1"), free)


@settings(max_examples=150, deadline=None)
@given(letters3(10), letters3(10))
def test_equal_in_G_consistent_with_quotients(u, v):
    if equal_in_G(u, v, E7):
        assert coxeter_trivial(concat(u, invert(v)), E7)
        assert abelian_image(u, E7) == abelian_image(v, E7)


def test_parabolic_intersections():
    rep = parabolic_intersection_check(E7, (1, 2), (1, 3), 4)
    assert rep.ok and rep.shared == {1}
    assert all(len(x) <= 1 for x, _ in rep.common)
    assert (EMPTY, EMPTY) in rep.common
    rep = parabolic_intersection_check(GroupSpec.uniform(4, 7), (1, 2), (3, 4), 3)
    assert rep.ok and rep.common == [(EMPTY, EMPTY)]
    with pytest.raises(ValueError):
        parabolic_intersection_check(E7, (1, 2), (2, 1), 3)


def test_non_extra_large_rejected_or_warned():
    spec = GroupSpec(3, {(1, 2): 3, (1, 3): 7, (2, 3): 7})
    with pytest.raises(NotExtraLargeError):
        dehn_solve(parse_word("a1"), spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dehn_solve(parse_word("a1"), spec, allow_non_extra_large=True)
    assert caught
