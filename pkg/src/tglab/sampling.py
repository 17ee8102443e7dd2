"""Seeded random generators for trees, group elements and algebra elements."""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np

from .forest import LEAF, Forest, Tree, cyclic_shift, identity_perm
from .lattice import CrossedElement, GaugeField
from .state import SpectralWeights
from .thompson import VElement, reduce


def random_tree(rng: random.Random, n_leaves: int, max_depth: int | None = None) -> Tree:
    """Grow a tree by attaching carets at random leaves that are shallow enough."""
    if max_depth is not None and n_leaves > 1 << max_depth:
        raise ValueError("too many leaves for the depth bound")
    depths = [0]
    while len(depths) < n_leaves:
        options = [i for i, d in enumerate(depths) if max_depth is None or d < max_depth]
        i = rng.choice(options)
        depths[i : i + 1] = [depths[i] + 1, depths[i] + 1]
    return _tree_from_depths(depths)


def _tree_from_depths(depths: list[int]) -> Tree:
    pos = 0

    def build(level: int) -> Tree:
        nonlocal pos
        if depths[pos] == level:
            pos += 1
            return LEAF
        left = build(level + 1)
        right = build(level + 1)
        return Tree(left, right)

    tree = build(0)
    assert pos == len(depths)
    return tree


def random_forest(rng: random.Random, roots: int, extra_leaves: int, max_depth: int = 3) -> Forest:
    counts = [1] * roots
    for _ in range(extra_leaves):
        counts[rng.randrange(roots)] += 1
    return Forest(random_tree(rng, c, max_depth if c <= 1 << max_depth else None) for c in counts)


def random_perm(rng: random.Random, n: int, kind: str) -> tuple[int, ...]:
    if kind == "F":
        return identity_perm(n)
    if kind == "T":
        return cyclic_shift(n, rng.randrange(n))
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    return tuple(perm)


def random_velement(
    rng: random.Random, max_leaves: int = 8, max_depth: int = 5, kind: str = "V"
) -> VElement:
    n = rng.randint(1, max_leaves)
    domain = random_tree(rng, n, max_depth)
    rng_tree = random_tree(rng, n, max_depth)
    return reduce(VElement(domain, rng_tree, random_perm(rng, n, kind)))


def random_coefficients(rng: random.Random, k: int, n: int, magnitude: int = 3) -> np.ndarray:
    gen = np.random.default_rng(rng.getrandbits(63))
    shape = (k,) * n
    return gen.integers(-magnitude, magnitude + 1, shape) + 1j * gen.integers(
        -magnitude, magnitude + 1, shape
    )


def random_element(
    rng: random.Random, tree: Tree, k: int, terms: int = 3, magnitude: int = 3
) -> CrossedElement:
    n = tree.n_leaves
    out = {}
    for _ in range(terms):
        g = tuple(rng.randrange(k) for _ in range(n))
        out[g] = random_coefficients(rng, k, n, magnitude)
    return CrossedElement(tree, k, out)


def random_gauge(rng: random.Random, tree: Tree, k: int) -> GaugeField:
    return GaugeField.on_tree(tree, [rng.randrange(k) for _ in range(tree.n_leaves)], k)


def random_weights(rng: random.Random, k: int, denominator: int = 12) -> SpectralWeights:
    raw = [rng.randint(1, denominator) for _ in range(k)]
    total = sum(raw)
    return SpectralWeights(tuple(Fraction(r, total) for r in raw))
