"""Product states omega_t on the finite crossed product, built from spectral weights."""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .cyclotomic import Cyclotomic, common_order
from .dyadic import Dyadic
from .forest import Forest, Tree, breakpoints, compose
from .heatmeasure import BetaProfile, mass_set
from .lattice import (
    CrossedElement,
    GaugeField,
    embed_element,
    gauge_act_element,
    jones_act_element,
    matrix_representation,
    translation_matrix,
)
from .thompson import VElement

# keeps sums of up to 2**10 coefficients exactly representable in a double
_EXACT_LIMIT = 2**40


@dataclass(frozen=True)
class SpectralWeights:
    """Probability weights on the characters m = 0..k-1 of Z/k."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(Fraction(w) for w in self.weights)
        if not ws or any(w < 0 for w in ws) or sum(ws) != 1:
            raise ValueError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", ws)

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def faithful(self) -> bool:
        """Strictly positive spectrum, so the state has no null projections."""
        return all(self.weights)

    @classmethod
    def uniform(cls, k: int) -> SpectralWeights:
        return cls((Fraction(1, k),) * k)

    def __str__(self) -> str:
        return "w:" + ",".join(str(w) for w in self.weights)


def parse_weights(text: str) -> SpectralWeights:
    body = text.strip()
    if body.startswith("w:"):
        body = body[2:]
    return SpectralWeights(tuple(Fraction(x.strip()) for x in body.split(",")))


def h_from_weights(w: SpectralWeights) -> Callable[[int], complex]:
    table = _h_table(w)
    return lambda g: table[g % w.k]


@lru_cache(maxsize=1024)
def _h_table(w: SpectralWeights) -> tuple[complex, ...]:
    k = w.k
    return tuple(
        sum(float(wm) * cmath.exp(2j * cmath.pi * m * g / k) for m, wm in enumerate(w.weights))
        for g in range(k)
    )


@lru_cache(maxsize=4096)
def h_exact(w: SpectralWeights, g: int, order: int) -> Cyclotomic:
    """h(g) in Q(zeta_order); order must be a multiple of k."""
    step = order // w.k
    coeffs: dict[int, Fraction] = {}
    for m, wm in enumerate(w.weights):
        key = step * m * g % order
        coeffs[key] = coeffs.get(key, 0) + wm
    return Cyclotomic(order, coeffs)


@dataclass(frozen=True)
class LeafWeights:
    tree: Tree
    weights: tuple[SpectralWeights, ...]

    def __post_init__(self):
        if len(self.weights) != self.tree.n_leaves:
            raise ValueError("one weight vector per leaf is required")

    @classmethod
    def constant(cls, tree: Tree, w: SpectralWeights) -> LeafWeights:
        return cls(tree, (w,) * tree.n_leaves)

    @classmethod
    def from_profile(cls, tree: Tree, profile: Callable[[Dyadic], SpectralWeights]) -> LeafWeights:
        return cls(tree, tuple(profile(d) for d in breakpoints(tree)))

    def extend(self, f: Sequence[Tree], fresh: Callable[[Dyadic], SpectralWeights]) -> LeafWeights:
        """Weights on the refined tree: old breakpoints keep theirs, new ones get fresh(d)."""
        fine = compose(Forest(f), [self.tree])[0]
        old = dict(zip(breakpoints(self.tree), self.weights))
        return LeafWeights(fine, tuple(old.get(d) or fresh(d) for d in breakpoints(fine)))


def _check_frame(x: CrossedElement, lw: LeafWeights) -> None:
    if lw.tree != x.tree:
        raise ValueError("leaf weights and element live on different trees")
    if any(w.k != x.k for w in lw.weights):
        raise ValueError("weight vectors do not match the group order")


def omega_t(x: CrossedElement, lw: LeafWeights) -> complex:
    _check_frame(x, lw)
    tables = [_h_table(w) for w in lw.weights]
    total = 0j
    for g, a in x.terms.items():
        weight = complex(np.mean(a))
        for table, gj in zip(tables, g):
            if gj:
                weight *= table[-gj % x.k]
        total += weight
    return total


def is_exact(x: CrossedElement) -> bool:
    for a in x.terms.values():
        parts = np.concatenate([a.real.ravel(), a.imag.ravel()])
        if np.any(parts != np.round(parts)) or np.any(np.abs(parts) >= _EXACT_LIMIT):
            return False
    return True


def omega_t_exact(x: CrossedElement, lw: LeafWeights) -> Cyclotomic:
    """omega_t in exact arithmetic; the coefficients must be Gaussian integers."""
    _check_frame(x, lw)
    if not is_exact(x):
        raise ValueError("exact evaluation needs Gaussian-integer coefficients")
    order = common_order(4, x.k)
    size = x.k**x.n
    total = Cyclotomic(order)
    for g, a in x.terms.items():
        s = a.sum()
        value = Cyclotomic.gaussian(order, Fraction(int(s.real), size), Fraction(int(s.imag), size))
        for w, gj in zip(lw.weights, g):
            if gj:
                value = value * h_exact(w, -gj % x.k, order)
        total = total + value
    return total


def residual(x: CrossedElement, lw_x: LeafWeights, y: CrossedElement, lw_y: LeafWeights) -> float:
    """|omega(y) - omega(x)|, computed exactly whenever the coefficients allow it."""
    if is_exact(x) and is_exact(y):
        diff = omega_t_exact(y, lw_y) - omega_t_exact(x, lw_x)
        return 0.0 if diff.is_zero() else abs(diff)
    return abs(omega_t(y, lw_y) - omega_t(x, lw_x))


def check_state_preserving(
    x: CrossedElement, f: Sequence[Tree], lw_coarse: LeafWeights, lw_fine: LeafWeights
) -> float:
    y = embed_element(x, f)
    old = dict(zip(breakpoints(lw_coarse.tree), lw_coarse.weights))
    new = dict(zip(breakpoints(lw_fine.tree), lw_fine.weights))
    if any(new.get(d) != w for d, w in old.items()):
        raise ValueError("fine weights must extend the coarse weights")
    return residual(x, lw_coarse, y, lw_fine)


def check_gauge_invariance(x: CrossedElement, s: GaugeField, lw: LeafWeights) -> float:
    return residual(x, lw, gauge_act_element(s, x), lw)


def check_jones_invariance(x: CrossedElement, v: VElement, w: SpectralWeights) -> float:
    y = jones_act_element(v, x)
    return residual(x, LeafWeights.constant(x.tree, w), y, LeafWeights.constant(y.tree, w))


def jones_residual_with_profile(
    x: CrossedElement, v: VElement, profile: Callable[[Dyadic], SpectralWeights]
) -> float:
    """Same comparison with position-dependent weights (no invariance expected)."""
    y = jones_act_element(v, x)
    return residual(
        x, LeafWeights.from_profile(x.tree, profile), y, LeafWeights.from_profile(y.tree, profile)
    )


def density_matrix(lw: LeafWeights) -> np.ndarray:
    """Convolution by h_t = prod_j h_j, normalized so that Tr(lambda_g H) = h_t(-g)."""
    k, n = lw.weights[0].k, lw.tree.n_leaves
    size = k**n
    tables = [_h_table(w) for w in lw.weights]
    out = np.zeros((size, size), dtype=complex)
    for y in np.ndindex(*(k,) * n):
        value = 1 + 0j
        for table, yj in zip(tables, y):
            value *= table[yj]
        out += value * translation_matrix(k, n, y) / size
    return out


def trace_formula(x: CrossedElement, lw: LeafWeights) -> complex:
    return complex(np.trace(matrix_representation(x) @ density_matrix(lw)))


def cylinder_state(
    b_coeffs: Sequence[tuple[Mapping[Dyadic, set[int] | frozenset[int]], complex]],
    beta: BetaProfile,
) -> complex:
    """sum over cylinders of coefficient times the product measure of the cylinder."""
    total = 0j
    for constraint, coeff in b_coeffs:
        value = complex(coeff)
        for d, allowed in constraint.items():
            value *= mass_set(beta(d), allowed) if allowed else 0.0
        total += value
    return total
