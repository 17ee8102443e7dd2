"""Lattice gauge data over Z/k at tree level: configurations, gauge fields, holonomy,
and elements sum_g a_g lambda_g of the finite crossed product."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dyadic import ZERO, Dyadic, DyadicArc, SDInterval, parse_dyadic
from .forest import (
    Forest,
    Tree,
    breakpoints,
    compose,
    factorize,
    join,
    leaf_intervals,
    leq,
    meet,
    parse_tree,
    partition_to_tree,
    perm_inverse,
)
from .thompson import VElement, act_dyadic, act_interval, inverse, with_domain

MAX_LEAVES = 10


@dataclass(frozen=True)
class GroupSpec:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("the modulus must be positive")

    def __str__(self) -> str:
        return f"zmod:{self.k}"


def parse_group(text: str) -> GroupSpec:
    m = re.fullmatch(r"\s*zmod:(\d+)\s*", text)
    if not m:
        raise ValueError(f"cannot parse group {text!r}, expected zmod:<k>")
    return GroupSpec(int(m.group(1)))


class Config:
    """One group element per leaf interval of tree, in left-to-right order."""

    __slots__ = ("tree", "values", "k")

    def __init__(self, tree: Tree, values: Sequence[int], k: int):
        if len(values) != tree.n_leaves:
            raise ValueError(f"config has {len(values)} values for {tree.n_leaves} intervals")
        self.tree = tree
        self.values = tuple(int(v) % k for v in values)
        self.k = k

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Config)
            and self.k == other.k
            and self.values == other.values
            and self.tree == other.tree
        )

    def __hash__(self) -> int:
        return hash((self.tree, self.values, self.k))

    def __repr__(self) -> str:
        return f"Config(tree={self.tree}, values={self.values}, k={self.k})"

    def as_mapping(self) -> dict[SDInterval, int]:
        return dict(zip(leaf_intervals(self.tree), self.values))

    def to_json(self) -> dict:
        return {"tree": str(self.tree), "group": f"zmod:{self.k}", "values": list(self.values)}


@dataclass(frozen=True)
class GaugeField:
    """A finitely supported map from dyadics to Z/k; unlisted points carry 0."""

    k: int
    values: Mapping[Dyadic, int]

    def __post_init__(self):
        clean = {d: int(v) % self.k for d, v in self.values.items() if int(v) % self.k}
        object.__setattr__(self, "values", clean)

    @classmethod
    def on_tree(cls, tree: Tree, values: Sequence[int], k: int) -> GaugeField:
        points = breakpoints(tree)
        if len(values) != len(points):
            raise ValueError(f"gauge field needs {len(points)} values, got {len(values)}")
        return cls(k, dict(zip(points, values)))

    def __call__(self, d: Dyadic) -> int:
        return self.values.get(d, 0)

    def __hash__(self) -> int:
        return hash((self.k, tuple(sorted(self.values.items()))))

    def on(self, tree: Tree) -> tuple[int, ...]:
        return tuple(self(d) for d in breakpoints(tree))

    def to_json(self) -> dict:
        return {"group": f"zmod:{self.k}", "values": {str(d): v for d, v in sorted(self.values.items())}}


def transport_gauge(v: VElement, s: GaugeField) -> GaugeField:
    """The field d -> s(v^-1 d)."""
    return GaugeField(s.k, {act_dyadic(v, d): x for d, x in s.values.items()})


@lru_cache(maxsize=4096)
def _coarsen_plan(fine: Tree, counts: tuple[int, ...]) -> Tree:
    points = breakpoints(fine)
    starts, pos = [], 0
    for c in counts:
        starts.append(points[pos])
        pos += c
    return partition_to_tree(starts)


def coarsen(x: Config, f: Sequence[Tree]) -> Config:
    f = Forest(f)
    if f.leaves != x.tree.n_leaves:
        raise ValueError(f"forest has {f.leaves} leaves, config tree has {x.tree.n_leaves}")
    coarse = _coarsen_plan(x.tree, f.leaf_counts)
    if compose(f, [coarse])[0] != x.tree:
        raise ValueError("forest does not graft onto a coarser tree of the config")
    sums, pos = [], 0
    for c in f.leaf_counts:
        sums.append(sum(x.values[pos : pos + c]))
        pos += c
    return Config(coarse, sums, x.k)


@lru_cache(maxsize=4096)
def _group_sizes(coarse: Tree, fine: Tree) -> tuple[int, ...]:
    f = leq(coarse, fine)
    if f is None:
        raise ValueError("target tree is not coarser than the config tree")
    return f.leaf_counts


def coarsen_to(x: Config, tree: Tree) -> Config:
    sums, pos = [], 0
    for c in _group_sizes(tree, x.tree):
        sums.append(sum(x.values[pos : pos + c]))
        pos += c
    return Config(tree, sums, x.k)


def coarsen_values(fine: Tree, coarse: Tree, values: np.ndarray, k: int) -> np.ndarray:
    """Batch coarsening: values has shape (..., leaves of fine)."""
    sizes = _group_sizes(coarse, fine)
    cuts = np.cumsum((0,) + sizes)[:-1]
    return np.add.reduceat(values, cuts, axis=-1) % k


@lru_cache(maxsize=4096)
def _meet(t: Tree, s: Tree) -> Tree:
    return meet(t, s)


def configs_agree(x: Config, y: Config) -> bool:
    """Equal on every interval both configurations determine."""
    if x.k != y.k:
        return False
    m = _meet(x.tree, y.tree)
    return coarsen_to(x, m).values == coarsen_to(y, m).values


def _covered(leaf: SDInterval, pieces: Iterable[SDInterval]) -> Fraction:
    total = Fraction(0)
    for p in pieces:
        if leaf.contains(p):
            total += p.length
        elif p.contains(leaf):
            return leaf.length
    return total


@lru_cache(maxsize=4096)
def _config_plan(v: VElement, tree: Tree) -> tuple[Tree, tuple[tuple[int, ...], ...]]:
    """Output tree of alpha(v) on configs over tree, and the input leaves summed per output leaf."""
    vinv = inverse(v)
    leaves = leaf_intervals(tree)
    memo: dict[SDInterval, tuple[int, ...] | None] = {}

    def sources(J: SDInterval) -> tuple[int, ...] | None:
        if J not in memo:
            pieces = act_interval(vinv, J)
            picked = []
            for idx, leaf in enumerate(leaves):
                c = _covered(leaf, pieces)
                if c == leaf.length:
                    picked.append(idx)
                elif c:
                    memo[J] = None
                    break
            else:
                memo[J] = tuple(picked)
        return memo[J]

    plan: list[tuple[int, ...]] = []

    def build(J: SDInterval) -> Tree:
        lo = SDInterval.from_index(2 * J.index, J.level + 1)
        hi = SDInterval.from_index(2 * J.index + 1, J.level + 1)
        if sources(lo) is not None and sources(hi) is not None:
            return Tree(build(lo), build(hi))
        plan.append(sources(J))
        return Tree()

    out = build(SDInterval.from_index(0, 0))
    return out, tuple(plan)


def jones_act_config(v: VElement, x: Config) -> Config:
    """x(v^-1 J) on the finest tree whose intervals x determines after the move."""
    out_tree, plan = _config_plan(v, x.tree)
    return Config(out_tree, [sum(x.values[i] for i in src) for src in plan], x.k)


def jones_act_values(v: VElement, tree: Tree, values: np.ndarray, k: int) -> tuple[Tree, np.ndarray]:
    """Batch form of jones_act_config over rows of values, shape (..., leaves)."""
    out_tree, plan = _config_plan(v, tree)
    cols = [values[..., list(src)].sum(axis=-1) for src in plan]
    return out_tree, np.stack(cols, axis=-1) % k


def _boundary_differences(tree: Tree, s: GaugeField) -> tuple[int, ...]:
    vals = s.on(tree)
    return tuple(a - b for a, b in zip(vals, vals[1:] + vals[:1]))


def gauge_act_config(s: GaugeField, x: Config) -> Config:
    if s.k != x.k:
        raise ValueError("group mismatch")
    delta = _boundary_differences(x.tree, s)
    return Config(x.tree, [a + b for a, b in zip(x.values, delta)], x.k)


def gauge_act_values(s: GaugeField, tree: Tree, values: np.ndarray) -> np.ndarray:
    """Batch form of gauge_act_config."""
    return (values + np.asarray(_boundary_differences(tree, s))) % s.k


def holonomy(x: Config) -> dict[Dyadic, int]:
    sums, acc = [], 0
    for val in reversed(x.values):
        acc = (acc + val) % x.k
        sums.append(acc)
    return dict(zip(breakpoints(x.tree), reversed(sums)))


def holonomy_inverse(tree: Tree, h: Mapping[Dyadic, int], k: int) -> Config:
    points = breakpoints(tree)
    if set(h) != set(points):
        raise ValueError("holonomy must be given on exactly the breakpoints of the tree")
    vals = [h[d] for d in points]
    return Config(tree, [a - b for a, b in zip(vals, vals[1:] + [0])], k)


def conjugated_gauge(s: GaugeField, h: Mapping[Dyadic, int]) -> dict[Dyadic, int]:
    """The gauge action transported through the holonomy map."""
    return {d: (s(d) + g - s(ZERO)) % s.k for d, g in h.items()}


# crossed-product elements


class CrossedElement:
    """sum_g a_g lambda_g over the tree; a_g is an array indexed by the leaf values.

    lambda_g translates leaf coordinate j by g_j, the label sitting at breakpoint j.
    """

    __slots__ = ("tree", "k", "terms")

    def __init__(self, tree: Tree, k: int, terms: Mapping[tuple[int, ...], np.ndarray]):
        n = tree.n_leaves
        if n > MAX_LEAVES:
            raise ValueError(f"trees with more than {MAX_LEAVES} leaves are not supported")
        shape = (k,) * n
        clean = {}
        for g, a in terms.items():
            g = tuple(int(x) % k for x in g)
            if len(g) != n:
                raise ValueError(f"label {g} does not match {n} breakpoints")
            a = np.asarray(a, dtype=complex).reshape(shape)
            if g in clean:
                a = clean[g] + a
            clean[g] = a
        self.tree, self.k = tree, k
        self.terms = {g: a for g, a in clean.items() if np.any(a)}

    @property
    def n(self) -> int:
        return self.tree.n_leaves

    def __add__(self, other: CrossedElement) -> CrossedElement:
        _same_frame(self, other)
        terms = dict(self.terms)
        for g, a in other.terms.items():
            terms[g] = terms[g] + a if g in terms else a
        return CrossedElement(self.tree, self.k, terms)

    def scale(self, c: complex) -> CrossedElement:
        return CrossedElement(self.tree, self.k, {g: c * a for g, a in self.terms.items()})

    def __mul__(self, other: CrossedElement) -> CrossedElement:
        return multiply_elements(self, other)

    def __repr__(self) -> str:
        return f"CrossedElement(tree={self.tree}, k={self.k}, terms={len(self.terms)})"

    def to_json(self) -> dict:
        return {
            "tree": str(self.tree),
            "group": f"zmod:{self.k}",
            "terms": [
                {
                    "label": list(g),
                    "re": a.real.ravel().tolist(),
                    "im": a.imag.ravel().tolist(),
                }
                for g, a in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> CrossedElement:
        tree = parse_tree(data["tree"])
        k = parse_group(data["group"]).k
        terms = {}
        for term in data["terms"]:
            re_part = np.asarray(term["re"], dtype=float)
            im_part = np.asarray(term.get("im", np.zeros_like(re_part)), dtype=float)
            terms[tuple(term["label"])] = re_part + 1j * im_part
        return cls(tree, k, terms)


def _same_frame(x: CrossedElement, y: CrossedElement) -> None:
    if x.tree != y.tree or x.k != y.k:
        raise ValueError("elements live on different trees or groups")


def identity_element(tree: Tree, k: int) -> CrossedElement:
    n = tree.n_leaves
    return CrossedElement(tree, k, {(0,) * n: np.ones((k,) * n)})


def function_element(tree: Tree, k: int, a) -> CrossedElement:
    return CrossedElement(tree, k, {(0,) * tree.n_leaves: a})


def translation_element(tree: Tree, k: int, g: Sequence[int]) -> CrossedElement:
    return CrossedElement(tree, k, {tuple(g): np.ones((k,) * tree.n_leaves)})


def _roll(a: np.ndarray, shift: Sequence[int]) -> np.ndarray:
    if not any(shift):
        return a
    return np.roll(a, tuple(shift), axis=tuple(range(a.ndim)))


def multiply_elements(x: CrossedElement, y: CrossedElement) -> CrossedElement:
    _same_frame(x, y)
    terms: dict[tuple[int, ...], np.ndarray] = {}
    for g, a in x.terms.items():
        for h, b in y.terms.items():
            gh = tuple((p + q) % x.k for p, q in zip(g, h))
            prod = a * _roll(b, g)
            terms[gh] = terms[gh] + prod if gh in terms else prod
    return CrossedElement(x.tree, x.k, terms)


def adjoint(x: CrossedElement) -> CrossedElement:
    terms = {}
    for g, a in x.terms.items():
        minus = tuple(-p % x.k for p in g)
        terms[minus] = _roll(np.conj(a), minus)
    return CrossedElement(x.tree, x.k, terms)


def _split_axis(a: np.ndarray, axis: int, k: int) -> np.ndarray:
    table = np.add.outer(np.arange(k), np.arange(k)) % k
    return np.take(a, table, axis=axis)


def embed_element(x: CrossedElement, f: Sequence[Tree]) -> CrossedElement:
    f = Forest(f)
    if f.roots != x.n:
        raise ValueError(f"forest has {f.roots} roots, element tree has {x.n} leaves")
    tree = compose(f, [x.tree])[0]
    if tree.n_leaves > MAX_LEAVES:
        raise ValueError(f"refined tree exceeds {MAX_LEAVES} leaves")
    terms = dict(x.terms)
    for j, _ in factorize(f):
        terms = {
            g[:j] + (0,) + g[j:]: _split_axis(a, j - 1, x.k) for g, a in terms.items()
        }
    return CrossedElement(tree, x.k, terms)


def refine_element(x: CrossedElement, tree: Tree) -> CrossedElement:
    f = leq(x.tree, tree)
    if f is None:
        raise ValueError("target tree does not refine the element tree")
    return embed_element(x, f)


def elements_equal(x: CrossedElement, y: CrossedElement, tol: float = 0.0) -> bool:
    if x.k != y.k:
        return False
    u = join(x.tree, y.tree)
    x, y = refine_element(x, u), refine_element(y, u)
    for g in set(x.terms) | set(y.terms):
        a = x.terms.get(g)
        b = y.terms.get(g)
        a = np.zeros((x.k,) * x.n) if a is None else a
        b = np.zeros((x.k,) * x.n) if b is None else b
        if tol == 0.0:
            if not np.array_equal(a, b):
                return False
        elif np.max(np.abs(a - b)) > tol:
            return False
    return True


def gauge_act_element(s: GaugeField, x: CrossedElement) -> CrossedElement:
    """Coefficients a_g become a_g(Z(s)^-1 .); labels stay put since Z/k is abelian."""
    if s.k != x.k:
        raise ValueError("group mismatch")
    delta = tuple(d % x.k for d in _boundary_differences(x.tree, s))
    return CrossedElement(x.tree, x.k, {g: _roll(a, delta) for g, a in x.terms.items()})


def jones_act_element(v: VElement, x: CrossedElement) -> CrossedElement:
    u = join(x.tree, v.domain)
    x = refine_element(x, u)
    w = with_domain(v, u)
    inv = perm_inverse(w.perm)
    axes = tuple(i - 1 for i in inv)
    terms = {}
    for g, a in x.terms.items():
        label = [0] * x.n
        for k_leaf, p in enumerate(w.perm):
            label[p - 1] = g[k_leaf]
        terms[tuple(label)] = np.transpose(a, axes)
    return CrossedElement(w.range, x.k, terms)


def support(x: CrossedElement) -> tuple[list[SDInterval], list[Dyadic]]:
    """Leaf intervals some coefficient depends on, and breakpoints carrying a nonzero label."""
    leaves = leaf_intervals(x.tree)
    points = breakpoints(x.tree)
    used_axes, used_labels = set(), set()
    for g, a in x.terms.items():
        used_labels.update(j for j, p in enumerate(g) if p)
        for axis in range(x.n):
            if not np.array_equal(a, np.take(a, [0] * x.k, axis=axis)):
                used_axes.add(axis)
    return [leaves[j] for j in sorted(used_axes)], [points[j] for j in sorted(used_labels)]


def localized_element_ok(x: CrossedElement, arc: DyadicArc) -> bool:
    intervals, labels = support(x)
    return all(arc.contains_interval(i) for i in intervals) and all(
        arc.in_boundary_set(d) for d in labels
    )


def image_arc(v: VElement, arc: DyadicArc) -> DyadicArc:
    return DyadicArc(act_dyadic(v, arc.start), act_dyadic(v, arc.end))


def translation_matrix(k: int, n: int, g: Sequence[int]) -> np.ndarray:
    """(P xi)(x) = xi(x - g) on functions of n coordinates in Z/k."""
    size = k**n
    idx = np.arange(size).reshape((k,) * n)
    src = _roll(idx, g).ravel()
    out = np.zeros((size, size))
    out[np.arange(size), src] = 1.0
    return out


def matrix_representation(x: CrossedElement) -> np.ndarray:
    size = x.k**x.n
    out = np.zeros((size, size), dtype=complex)
    for g, a in x.terms.items():
        out += a.ravel()[:, None] * translation_matrix(x.k, x.n, g)
    return out


def all_configs(tree: Tree, k: int) -> Iterable[Config]:
    for vals in product(range(k), repeat=tree.n_leaves):
        yield Config(tree, vals, k)


def parse_values(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def parse_gauge_values(text: str, tree: Tree, k: int) -> GaugeField:
    """Either a plain list (one per breakpoint) or "d:v" pairs such as "0:1,1/2:2"."""
    items = [t.strip() for t in text.split(",") if t.strip()]
    if items and all(":" in t for t in items):
        return GaugeField(k, {parse_dyadic(t.split(":")[0]): int(t.split(":")[1]) for t in items})
    return GaugeField.on_tree(tree, [int(t) for t in items], k)

