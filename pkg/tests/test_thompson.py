from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tglab.dyadic import SDInterval, ZERO, enumerate_dyadics, parse_dyadic
from tglab.forest import CARET, LEAF, complete_tree, parse_tree, right_comb
from tglab.sampling import random_velement
from tglab.thompson import (
    GENERATOR_A,
    GENERATOR_B,
    GENERATOR_C,
    IDENTITY,
    VElement,
    act_dyadic,
    act_fraction,
    act_interval,
    as_pl_map,
    classify,
    expand_domain,
    from_pair,
    inverse,
    multiply,
    parse_element,
    parse_literal,
    power,
    reduce,
    rotation,
    rotation_angle,
)

QUARTER_TREE = parse_tree("((* *) *)")


def _d(text: str):
    return parse_dyadic(text)


@st.composite
def elements(draw, kind=None):
    rng = random.Random(draw(st.integers(0, 2**32)))
    return random_velement(rng, 8, 5, kind or draw(st.sampled_from("FTV")))


def _pl_equal(g: VElement, h: VElement) -> bool:
    depth = max(g.domain.depth, g.range.depth, h.domain.depth, h.range.depth) + 2
    return all(act_dyadic(g, d) == act_dyadic(h, d) for d in enumerate_dyadics(depth))


def test_reduce_examples():
    assert reduce(VElement(QUARTER_TREE, QUARTER_TREE, (1, 2, 3))) == IDENTITY
    # range tree {0,1/4,1/2}, domain the right caret tree
    a = from_pair(QUARTER_TREE, (1, 2, 3), right_comb(3), (1, 2, 3))
    assert a == GENERATOR_A
    assert act_interval(a, SDInterval.from_index(0, 1)) == [SDInterval.from_index(0, 2)]
    assert act_interval(a, SDInterval.from_index(2, 2)) == [SDInterval.from_index(1, 2)]
    assert act_interval(a, SDInterval.from_index(3, 2)) == [SDInterval.from_index(1, 1)]


def test_unreduced_input_reduces_to_same_form():
    fat = expand_domain(GENERATOR_A, [CARET, LEAF, LEAF])
    assert fat != GENERATOR_A
    assert reduce(fat) == GENERATOR_A
    assert _pl_equal(fat, GENERATOR_A)


def test_multiply_examples():
    g = GENERATOR_B
    assert multiply(g, inverse(g)) == IDENTITY
    assert multiply(rotation(1), rotation(1)) == IDENTITY
    ab = multiply(GENERATOR_A, GENERATOR_B)
    for j in range(64):
        x = Fraction(j, 64)
        assert act_fraction(ab, x) == act_fraction(GENERATOR_A, act_fraction(GENERATOR_B, x))


@pytest.mark.parametrize("n", range(1, 6))
def test_inverse_of_rotation_is_a_power(n):
    assert inverse(rotation(n)) == power(rotation(n), 2**n - 1)
    assert inverse(IDENTITY) == IDENTITY


def test_classify_examples():
    assert classify(IDENTITY) == "identity"
    assert classify(GENERATOR_A) == classify(GENERATOR_B) == "F"
    assert classify(GENERATOR_C) == "T_only"
    for n in range(1, 6):
        assert classify(rotation(n)) == "T_only"
    swap_two = VElement(right_comb(3), right_comb(3), (2, 1, 3))
    assert classify(swap_two) == "V_only"


def test_act_dyadic_examples():
    assert act_dyadic(IDENTITY, _d("3/8")) == _d("3/8")
    assert act_dyadic(rotation(1), _d("1/4")) == _d("3/4")
    assert act_dyadic(GENERATOR_A, ZERO) == ZERO
    assert act_dyadic(rotation(2, 1), _d("3/4")) == ZERO


def test_pl_map_examples():
    assert len(as_pl_map(IDENTITY)) == 1 and as_pl_map(IDENTITY)[0].slope_exponent == 0
    for n in range(1, 6):
        pieces = as_pl_map(rotation(n))
        assert len(pieces) == 2**n
        assert all(p.slope_exponent == 0 for p in pieces)
    assert sorted(p.slope_exponent for p in as_pl_map(GENERATOR_A)) == [-1, 0, 1]


def test_rotation_examples():
    assert rotation(3, 0) == IDENTITY
    for n in range(1, 7):
        assert rotation(n, 2) == rotation(n - 1, 1)
        assert rotation_angle(rotation(n, 3)).value == Fraction(3 % 2**n, 2**n)
    assert rotation_angle(GENERATOR_A) is None


def test_act_interval_inverse():
    pieces = act_interval(inverse(GENERATOR_A), SDInterval.from_index(0, 1))
    assert [str(p) for p in pieces] == ["(0,1/2)", "(1/2,3/4)"]
    assert act_interval(IDENTITY, SDInterval.from_index(0, 0)) == [SDInterval.from_index(0, 0)]


@settings(max_examples=150)
@given(elements(), elements(), elements())
def test_group_axioms(g, h, w):
    assert multiply(multiply(g, h), w) == multiply(g, multiply(h, w))
    assert multiply(g, IDENTITY) == g == multiply(IDENTITY, g)
    assert multiply(g, inverse(g)) == IDENTITY == multiply(inverse(g), g)


@settings(max_examples=100)
@given(elements(), elements())
def test_action_law(g, h):
    gh = multiply(g, h)
    for d in enumerate_dyadics(8)[::3]:
        assert act_dyadic(gh, d) == act_dyadic(g, act_dyadic(h, d))


@settings(max_examples=100)
@given(elements(), elements())
def test_canonical_form_agrees_with_pl_maps(g, h):
    assert (g == h) == _pl_equal(g, h)
    padded = expand_domain(g, [CARET] * g.domain.n_leaves)
    assert reduce(padded) == g


@given(elements("F"), elements("F"))
def test_f_is_closed(a, b):
    assert classify(multiply(a, b)) in ("identity", "F")


@given(elements("T"), elements("T"))
def test_t_is_closed(a, b):
    assert classify(multiply(a, b)) in ("identity", "F", "T_only")


@pytest.mark.parametrize("n", range(0, 9))
def test_rotation_order(n):
    r, acc = rotation(n), rotation(n)
    for _ in range(2**n - 1):
        assert acc != IDENTITY
        acc = multiply(r, acc)
    assert acc == IDENTITY


def test_parse_element():
    assert parse_element("A.A^-1") == IDENTITY
    assert parse_element("r2^2") == rotation(1)
    assert parse_element("A.B") == multiply(GENERATOR_A, GENERATOR_B)
    literal = "{range: ((* *) *), domain: (* (* *)), perm: [1,2,3]}"
    assert parse_literal(literal) == GENERATOR_A
    assert parse_element(literal + ".C") == multiply(GENERATOR_A, GENERATOR_C)
    assert str(GENERATOR_A) == literal


def test_parse_errors_report_position():
    with pytest.raises(ValueError, match="position 2"):
        parse_element("A.Q")
    with pytest.raises(ValueError, match="position 1"):
        parse_element("A,B")
    with pytest.raises(ValueError):
        parse_literal("{range: (* *), domain: *, perm: [1]}")


def test_complete_tree_rotation_matches_shift():
    t = complete_tree(3)
    r = rotation(3, 5)
    assert (r.domain, r.range) == (t, t)
    assert r.perm == tuple((i + 5) % 8 + 1 for i in range(8))
