"""Thompson's groups F < T < V as reduced tree-pair diagrams with a leaf permutation."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .dyadic import Dyadic, SDInterval, SDPartition, normalize
from .forest import (
    LEAF,
    Forest,
    Permutation,
    Tree,
    breakpoints,
    check_perm,
    collapse_caret,
    common_refinement,
    complete_tree,
    compose,
    cyclic_shift,
    identity_perm,
    leaf_intervals,
    leq,
    parse_perm,
    parse_tree,
    partition_to_tree,
    perm_compose,
    perm_inverse,
    sibling_carets,
)


class VElement:
    """Domain leaf k is carried affinely onto range leaf perm[k-1]."""

    __slots__ = ("domain", "range", "perm", "_hash")

    def __init__(self, domain: Tree, range: Tree, perm: Sequence[int]):
        perm = check_perm(perm)
        if not domain.n_leaves == range.n_leaves == len(perm):
            raise ValueError("domain, range and permutation sizes differ")
        self.domain = domain
        self.range = range
        self.perm = perm
        self._hash = hash((domain, range, perm))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, VElement)
            and self._hash == other._hash
            and self.perm == other.perm
            and self.domain == other.domain
            and self.range == other.range
        )

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        perm = ",".join(map(str, self.perm))
        return f"{{range: {self.range}, domain: {self.domain}, perm: [{perm}]}}"

    def __repr__(self) -> str:
        return f"VElement({self})"

    def __mul__(self, other: VElement) -> VElement:
        return multiply(self, other)


IDENTITY = VElement(LEAF, LEAF, (1,))


def reduce(g: VElement) -> VElement:
    domain, rng, perm = g.domain, g.range, list(g.perm)
    while True:
        range_carets = set(sibling_carets(rng))
        for k in sibling_carets(domain):
            j = perm[k - 1]
            if perm[k] == j + 1 and j in range_carets:
                break
        else:
            return VElement(domain, rng, perm)
        domain = collapse_caret(domain, k)
        rng = collapse_caret(rng, j)
        rest = perm[: k - 1] + [j] + perm[k + 1 :]
        perm = [x - 1 if x > j else x for x in rest]


def from_pair(range: Tree, tau: Sequence[int], domain: Tree, sigma: Sequence[int]) -> VElement:
    """The fraction (range, tau) / (domain, sigma), reduced."""
    tau, sigma = check_perm(tau), check_perm(sigma)
    if not range.n_leaves == domain.n_leaves == len(tau) == len(sigma):
        raise ValueError("leaf counts of the fraction do not match")
    return reduce(VElement(domain, range, perm_compose(perm_inverse(tau), sigma)))


def _offsets(counts: Sequence[int]) -> list[int]:
    out = [0]
    for c in counts:
        out.append(out[-1] + c)
    return out


def expand_domain(g: VElement, f: Sequence[Tree]) -> VElement:
    """Same map, with domain leaf k subdivided by tree f[k-1] (and its image likewise)."""
    f = Forest(f)
    n = len(g.perm)
    if f.roots != n:
        raise ValueError("forest roots must equal the leaf count")
    inv = perm_inverse(g.perm)
    range_forest = Forest(f[inv[j] - 1] for j in range(n))
    rng_off = _offsets(range_forest.leaf_counts)
    perm: list[int] = []
    for k in range(n):
        j = g.perm[k] - 1
        perm.extend(rng_off[j] + r + 1 for r in range(f[k].n_leaves))
    return VElement(compose(f, [g.domain])[0], compose(range_forest, [g.range])[0], perm)


def expand_range(g: VElement, f: Sequence[Tree]) -> VElement:
    f = Forest(f)
    if f.roots != len(g.perm):
        raise ValueError("forest roots must equal the leaf count")
    return expand_domain(g, Forest(f[x - 1] for x in g.perm))


def with_domain(g: VElement, tree: Tree) -> VElement:
    """Rewrite g over a domain tree refining its own."""
    f = leq(g.domain, tree)
    if f is None:
        raise ValueError("tree does not refine the domain of the element")
    return expand_domain(g, f)


def multiply(g: VElement, h: VElement) -> VElement:
    """The composite g after h."""
    p, q = common_refinement(h.range, g.domain)
    h2 = expand_range(h, p)
    g2 = expand_domain(g, q)
    return reduce(VElement(h2.domain, g2.range, perm_compose(g2.perm, h2.perm)))


def inverse(g: VElement) -> VElement:
    return VElement(g.range, g.domain, perm_inverse(g.perm))


def power(g: VElement, k: int) -> VElement:
    base = g if k >= 0 else inverse(g)
    out = IDENTITY
    for _ in range(abs(k)):
        out = multiply(base, out)
    return out


def is_cyclic_shift(perm: Permutation) -> bool:
    n = len(perm)
    c = perm[0] - 1
    return perm == cyclic_shift(n, c)


def classify(g: VElement) -> str:
    if g == IDENTITY:
        return "identity"
    if g.perm == identity_perm(len(g.perm)):
        return "F"
    if is_cyclic_shift(g.perm):
        return "T_only"
    return "V_only"


def in_T(g: VElement) -> bool:
    return is_cyclic_shift(g.perm)


@dataclass(frozen=True)
class PLPiece:
    domain: SDInterval
    slope_exponent: int
    image_left: Dyadic


PLMap = tuple[PLPiece, ...]


@lru_cache(maxsize=8192)
def as_pl_map(g: VElement) -> PLMap:
    dom = leaf_intervals(g.domain)
    rng = leaf_intervals(g.range)
    return tuple(
        PLPiece(i, i.level - rng[p - 1].level, rng[p - 1].left) for i, p in zip(dom, g.perm)
    )


@lru_cache(maxsize=8192)
def _domain_edges(g: VElement) -> tuple[Fraction, ...]:
    return tuple(d.value for d in breakpoints(g.domain))


def act_fraction(g: VElement, x: Fraction) -> Fraction:
    """Image of a point of [0,1) under the PL map of g."""
    edges = _domain_edges(g)
    k = bisect.bisect_right(edges, x) - 1
    piece = as_pl_map(g)[k]
    return piece.image_left.value + (x - edges[k]) * Fraction(2) ** piece.slope_exponent


def act_dyadic(g: VElement, d: Dyadic) -> Dyadic:
    return Dyadic.from_fraction(act_fraction(g, d.value))


def act_interval(g: VElement, interval: SDInterval) -> list[SDInterval]:
    """Images of the pieces of interval on which g is affine, in domain order."""
    out = []
    for piece, p in zip(leaf_intervals(g.domain), g.perm):
        image = leaf_intervals(g.range)[p - 1]
        if piece.contains(interval):
            depth = interval.level - piece.level
            rel = interval.index - (piece.index << depth)
            return [SDInterval.from_index((image.index << depth) + rel, image.level + depth)]
        if interval.contains(piece):
            out.append(image)
    return out


def rotation(n: int, k: int = 1) -> VElement:
    """Rotation of the torus by k / 2**n."""
    if n < 0:
        raise ValueError("rotation level must be nonnegative")
    t = complete_tree(n)
    return reduce(VElement(t, t, cyclic_shift(1 << n, k % (1 << n))))


def rotation_angle(g: VElement) -> Dyadic | None:
    """The angle of g if g is a rotation of the torus, else None."""
    if not in_T(g):
        return None
    if any(piece.slope_exponent for piece in as_pl_map(g)):
        return None
    return act_dyadic(g, normalize(0, 0))


def _tree_of(*points: str) -> Tree:
    return partition_to_tree(SDPartition.of(points))


GENERATOR_A = from_pair(_tree_of("0", "1/4", "1/2"), (1, 2, 3), _tree_of("0", "1/2", "3/4"), (1, 2, 3))
GENERATOR_B = from_pair(
    _tree_of("0", "1/2", "5/8", "3/4"), (1, 2, 3, 4), _tree_of("0", "1/2", "3/4", "7/8"), (1, 2, 3, 4)
)
GENERATOR_C = VElement(_tree_of("0", "1/2", "3/4"), _tree_of("0", "1/2", "3/4"), (3, 1, 2))

NAMED = {"A": GENERATOR_A, "B": GENERATOR_B, "C": GENERATOR_C, "id": IDENTITY}

_LITERAL_RE = re.compile(
    r"^\{\s*range\s*:\s*(?P<range>[()* ]+?)\s*,\s*domain\s*:\s*(?P<domain>[()* ]+?)\s*,"
    r"\s*perm\s*:\s*(?P<perm>\[[\d,\s]*\])\s*\}$"
)
_TOKEN_RE = re.compile(r"(\{[^}]*\}|[A-Za-z]+\d*)(?:\^(-?\d+))?")


def parse_literal(text: str) -> VElement:
    m = _LITERAL_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse element {text!r}")
    return reduce(VElement(parse_tree(m["domain"]), parse_tree(m["range"]), parse_perm(m["perm"])))


def parse_element(text: str) -> VElement:
    """A product of named generators or literals, e.g. "A.B^-1.r3^2" (leftmost acts last)."""
    out = IDENTITY
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse element at position {pos}: {text[pos:]!r}")
        word = m.group(1)
        if word.startswith("{"):
            base = parse_literal(word)
        elif word in NAMED:
            base = NAMED[word]
        elif re.fullmatch(r"r\d+", word):
            base = rotation(int(word[1:]), 1)
        else:
            raise ValueError(f"unknown generator {word!r} at position {pos}")
        out = multiply(out, power(base, int(m.group(2) or 1)))
        pos = m.end()
        if pos < len(text):
            if text[pos] != ".":
                raise ValueError(f"expected '.' at position {pos} in {text!r}")
            pos += 1
    return out
