from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tglab.dyadic import ZERO, ell, parse_dyadic
from tglab.forest import CARET, LEAF, complete_tree, identity_forest, partition_to_tree
from tglab.heatmeasure import mass, parse_beta, partition_function
from tglab.lattice import (
    GaugeField,
    adjoint,
    function_element,
    identity_element,
    multiply_elements,
    translation_element,
)
from tglab.sampling import random_element, random_forest, random_gauge, random_tree, random_velement, random_weights
from tglab.state import (
    LeafWeights,
    SpectralWeights,
    check_gauge_invariance,
    check_jones_invariance,
    check_state_preserving,
    cylinder_state,
    density_matrix,
    h_exact,
    h_from_weights,
    is_exact,
    jones_residual_with_profile,
    omega_t,
    omega_t_exact,
    parse_weights,
    residual,
    trace_formula,
)
from tglab.thompson import GENERATOR_A, IDENTITY, rotation

SKEWED = parse_weights("w:3/4,1/4")


@st.composite
def framed(draw, max_leaves=4, ks=(2, 3, 4)):
    rng = random.Random(draw(st.integers(0, 2**32)))
    k = draw(st.sampled_from(ks))
    tree = random_tree(rng, rng.randint(1, max_leaves), 3)
    lw = LeafWeights(tree, tuple(random_weights(rng, k) for _ in range(tree.n_leaves)))
    return rng, k, tree, lw


def test_weights_parsing_and_validation():
    assert SKEWED.weights == (Fraction(3, 4), Fraction(1, 4))
    assert str(SKEWED) == "w:3/4,1/4"
    with pytest.raises(ValueError):
        parse_weights("w:1/2,1/4")
    with pytest.raises(ValueError):
        parse_weights("w:3/2,-1/2")
    assert not parse_weights("w:1,0").faithful and SKEWED.faithful


def test_h_examples():
    for k in (2, 3, 5):
        h = h_from_weights(SpectralWeights.uniform(k))
        assert abs(h(0) - 1) < 1e-15
        assert all(abs(h(g)) < 1e-15 for g in range(1, k))
    h = h_from_weights(SKEWED)
    assert h(0) == 1 and abs(h(1) - 0.5) < 1e-15
    assert h_exact(SKEWED, 1, 4) == Fraction(1, 2)
    for k in (4, 6):
        w = SpectralWeights(tuple(Fraction(m + 1, k * (k + 1) // 2) for m in range(k)))
        for g in range(k):
            assert abs(complex(h_exact(w, g, 12)) - h_from_weights(w)(g)) < 1e-14
    point = h_from_weights(parse_weights("w:1,0,0"))
    assert all(abs(point(g) - 1) < 1e-15 for g in range(3))


def test_omega_examples():
    assert omega_t(identity_element(complete_tree(2), 3), LeafWeights.constant(complete_tree(2), SpectralWeights.uniform(3))) == 1
    x = translation_element(LEAF, 2, (1,))
    assert omega_t(x, LeafWeights.constant(LEAF, SKEWED)) == pytest.approx(0.5, abs=1e-15)
    assert omega_t_exact(x, LeafWeights.constant(LEAF, SKEWED)) == Fraction(1, 2)
    a = np.array([[1.0, 2.0], [3.0, 7.0]])
    assert omega_t(function_element(CARET, 2, a), LeafWeights.constant(CARET, SKEWED)) == pytest.approx(3.25)


def test_exact_mode_needs_gaussian_integers():
    x = function_element(LEAF, 2, np.array([0.5, 1.0]))
    assert not is_exact(x)
    with pytest.raises(ValueError):
        omega_t_exact(x, LeafWeights.constant(LEAF, SKEWED))
    assert residual(x, LeafWeights.constant(LEAF, SKEWED), x, LeafWeights.constant(LEAF, SKEWED)) == 0.0


def test_state_preservation_examples():
    rng = random.Random(2)
    x = random_element(rng, CARET, 3)
    lw = LeafWeights.constant(CARET, SpectralWeights.uniform(3))
    assert check_state_preserving(x, identity_forest(2), lw, lw) == 0
    f = [CARET, LEAF]
    fine = lw.extend(f, lambda d: random_weights(rng, 3))
    assert check_state_preserving(x, f, lw, fine) == 0
    lam = translation_element(CARET, 3, (1, 2))
    fine = lw.extend([CARET, CARET], lambda d: random_weights(rng, 3))
    assert check_state_preserving(lam, [CARET, CARET], lw, fine) == 0


def test_state_preservation_rejects_inconsistent_weights():
    x = identity_element(CARET, 2)
    coarse = LeafWeights.constant(CARET, SKEWED)
    wrong = LeafWeights.constant(complete_tree(2), SpectralWeights.uniform(2))
    with pytest.raises(ValueError):
        check_state_preserving(x, [CARET, CARET], coarse, wrong)


@settings(max_examples=120)
@given(framed(max_leaves=5))
def test_state_preservation_is_exact(frame):
    rng, k, tree, lw = frame
    x = random_element(rng, tree, k)
    f = random_forest(rng, tree.n_leaves, rng.randint(0, 3))
    assert check_state_preserving(x, f, lw, lw.extend(f, lambda d: random_weights(rng, k))) == 0


def test_gauge_examples():
    rng = random.Random(4)
    x = random_element(rng, CARET, 4)
    lw = LeafWeights.constant(CARET, SpectralWeights.uniform(4))
    assert check_gauge_invariance(x, GaugeField(4, {}), lw) == 0
    s = random_gauge(rng, CARET, 4)
    assert check_gauge_invariance(function_element(CARET, 4, np.arange(16.0)), s, lw) == 0
    assert check_gauge_invariance(translation_element(CARET, 4, (1, 1)), s, lw) == 0


@settings(max_examples=120)
@given(framed(max_leaves=5))
def test_gauge_invariance_is_exact(frame):
    rng, k, tree, lw = frame
    assert check_gauge_invariance(random_element(rng, tree, k), random_gauge(rng, tree, k), lw) == 0


def test_jones_examples():
    rng = random.Random(6)
    x = random_element(rng, CARET, 2)
    assert check_jones_invariance(x, IDENTITY, SKEWED) == 0
    product_element = function_element(CARET, 2, np.outer([1.0, 2.0], [3.0, 5.0]))
    assert check_jones_invariance(product_element, rotation(1), SKEWED) == 0


def test_jones_negative_control():
    tree = partition_to_tree([parse_dyadic(t) for t in ("0", "1/2", "3/4")])
    x = translation_element(tree, 2, (0, 1, 0))
    flat = SpectralWeights.uniform(2)
    profile = lambda d: SKEWED if ell(d) == 1 else flat  # noqa: E731
    assert jones_residual_with_profile(x, GENERATOR_A, profile) == pytest.approx(0.5)
    assert check_jones_invariance(x, GENERATOR_A, SKEWED) == 0


@settings(max_examples=100)
@given(framed(), st.integers(0, 2**32))
def test_jones_invariance_is_exact(frame, seed):
    rng, k, tree, _ = frame
    w = random_weights(rng, k)
    v = random_velement(random.Random(seed), 5, 3)
    assert check_jones_invariance(random_element(rng, tree, k), v, w) == 0


@settings(max_examples=60)
@given(framed(max_leaves=3))
def test_positivity_and_normalization(frame):
    rng, k, tree, lw = frame
    x = random_element(rng, tree, k)
    value = omega_t(multiply_elements(adjoint(x), x), lw)
    assert abs(value.imag) <= 1e-12 * max(1.0, abs(value))
    assert value.real >= -1e-12
    assert omega_t(identity_element(tree, k), lw) == 1


@settings(max_examples=40)
@given(framed(max_leaves=3))
def test_trace_formula_oracle(frame):
    rng, k, tree, lw = frame
    x = random_element(rng, tree, k)
    assert abs(trace_formula(x, lw) - omega_t(x, lw)) <= 1e-12 * max(1.0, abs(omega_t(x, lw)))
    assert abs(complex(omega_t_exact(x, lw)) - omega_t(x, lw)) <= 1e-9
    H = density_matrix(lw)
    assert np.allclose(H, H.conj().T)
    assert np.linalg.eigvalsh(H).min() > 0


def test_non_faithful_weights_give_singular_density():
    H = density_matrix(LeafWeights.constant(LEAF, parse_weights("w:1,0")))
    assert np.linalg.eigvalsh(H).min() == pytest.approx(0, abs=1e-12)


def test_cylinder_examples():
    beta = parse_beta(f"const:{2 * math.pi}")
    assert cylinder_state([({}, 1.0)], beta) == 1
    value = cylinder_state([({ZERO: {0}}, 1.0)], beta)
    assert value == pytest.approx(1 / partition_function(2 * math.pi), rel=1e-14)
    assert abs(value.real - 0.920444) < 5e-6
    half = parse_dyadic("1/2")
    tau = parse_beta("tau:1")
    both = cylinder_state([({ZERO: {0}, half: {-1, 0, 1}}, 2.0)], tau)
    expected = 2 * mass(tau(ZERO), 0) * sum(mass(tau(half), n) for n in (-1, 0, 1))
    assert both == pytest.approx(expected)


def test_weights_extension_keeps_old_points():
    lw = LeafWeights.constant(CARET, SKEWED)
    fine = lw.extend([LEAF, CARET], lambda d: SpectralWeights.uniform(2))
    assert fine.weights == (SKEWED, SKEWED, SpectralWeights.uniform(2))
