"""Binary trees and forests, symmetric forests, and the tree/partition bijection."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .dyadic import UNIT, SDInterval, SDPartition, Dyadic, halves

Permutation = tuple[int, ...]


class Tree:
    """Rooted binary tree: a leaf, or a node with two ordered subtrees."""

    __slots__ = ("left", "right", "n_leaves", "depth", "_hash")

    def __init__(self, left: Tree | None = None, right: Tree | None = None):
        if (left is None) != (right is None):
            raise ValueError("an internal node needs exactly two children")
        self.left = left
        self.right = right
        if left is None:
            self.n_leaves, self.depth, self._hash = 1, 0, 0x5EED
        else:
            self.n_leaves = left.n_leaves + right.n_leaves
            self.depth = 1 + max(left.depth, right.depth)
            self._hash = hash((left._hash, right._hash))

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Tree) or self._hash != other._hash:
            return False
        if self.n_leaves != other.n_leaves:
            return False
        if self.left is None:
            return other.left is None
        return self.left == other.left and self.right == other.right

    def __str__(self) -> str:
        if self.left is None:
            return "*"
        return f"({self.left} {self.right})"

    def __repr__(self) -> str:
        return f"Tree({self})"


LEAF = Tree()
CARET = Tree(LEAF, LEAF)


def node(left: Tree, right: Tree) -> Tree:
    return Tree(left, right)


def complete_tree(n: int) -> Tree:
    """The tree t_n whose leaves are all s.d.i. of level n."""
    t = LEAF
    for _ in range(n):
        t = Tree(t, t)
    return t


def left_comb(leaves: int) -> Tree:
    t = LEAF
    for _ in range(leaves - 1):
        t = Tree(t, LEAF)
    return t


def right_comb(leaves: int) -> Tree:
    t = LEAF
    for _ in range(leaves - 1):
        t = Tree(LEAF, t)
    return t


def all_trees(n_leaves: int) -> list[Tree]:
    return list(_all_trees(n_leaves))


@lru_cache(maxsize=None)
def _all_trees(n: int) -> tuple[Tree, ...]:
    if n == 1:
        return (LEAF,)
    out = []
    for k in range(1, n):
        for a in _all_trees(k):
            for b in _all_trees(n - k):
                out.append(Tree(a, b))
    return tuple(out)


class Forest(tuple):
    """Ordered sequence of trees; a morphism from len(self) roots to its leaf count."""

    __slots__ = ()

    def __new__(cls, trees: Iterable[Tree] = ()):
        trees = tuple(trees)
        if not trees:
            raise ValueError("a forest has at least one root")
        return super().__new__(cls, trees)

    @property
    def roots(self) -> int:
        return len(self)

    @property
    def leaves(self) -> int:
        return sum(t.n_leaves for t in self)

    @property
    def leaf_counts(self) -> tuple[int, ...]:
        return tuple(t.n_leaves for t in self)

    def __str__(self) -> str:
        return ",".join(str(t) for t in self)

    def __repr__(self) -> str:
        return f"Forest({self})"


def identity_forest(n: int) -> Forest:
    return Forest([LEAF] * n)


def elementary(j: int, n: int) -> Forest:
    if not 1 <= j <= n:
        raise ValueError(f"elementary forest index {j} outside 1..{n}")
    trees = [LEAF] * n
    trees[j - 1] = CARET
    return Forest(trees)


def tensor(f: Sequence[Tree], g: Sequence[Tree]) -> Forest:
    return Forest(tuple(f) + tuple(g))


def _graft(tree: Tree, feed: Iterator[Tree]) -> Tree:
    if tree.left is None:
        return next(feed)
    return Tree(_graft(tree.left, feed), _graft(tree.right, feed))


def graft_tree(tree: Tree, on_leaves: Sequence[Tree]) -> Tree:
    """Attach on_leaves[i] at leaf i of tree."""
    if len(on_leaves) != tree.n_leaves:
        raise ValueError("one tree per leaf is required")
    return _graft(tree, iter(on_leaves))


def compose(g: Sequence[Tree], f: Sequence[Tree]) -> Forest:
    """Stack g on top of f: tree i of g is grafted on leaf i of f."""
    g, f = Forest(g), Forest(f)
    if g.roots != f.leaves:
        raise ValueError(f"cannot compose: {g.roots} roots over {f.leaves} leaves")
    feed = iter(g)
    return Forest(_graft(t, feed) for t in f)


def factorize(f: Sequence[Tree]) -> list[tuple[int, int]]:
    """Elementary factors (j, n), bottom first, whose composite is f."""
    trees = list(f)
    steps = []
    pos = 0
    while pos < len(trees):
        t = trees[pos]
        if t.left is None:
            pos += 1
            continue
        steps.append((pos + 1, len(trees)))
        trees[pos : pos + 1] = [t.left, t.right]
    return steps


def from_factors(roots: int, steps: Sequence[tuple[int, int]]) -> Forest:
    acc = identity_forest(roots)
    for j, n in steps:
        if n != acc.leaves:
            raise ValueError("factor arity does not chain")
        acc = compose(elementary(j, n), acc)
    return acc


@lru_cache(maxsize=4096)
def leaf_intervals(t: Tree) -> tuple[SDInterval, ...]:
    out: list[SDInterval] = []

    def walk(tree: Tree, interval: SDInterval) -> None:
        if tree.left is None:
            out.append(interval)
        else:
            lo, hi = halves(interval)
            walk(tree.left, lo)
            walk(tree.right, hi)

    walk(t, UNIT)
    return tuple(out)


@lru_cache(maxsize=4096)
def breakpoints(t: Tree) -> tuple[Dyadic, ...]:
    return tuple(i.left for i in leaf_intervals(t))


def tree_to_partition(t: Tree) -> SDPartition:
    return SDPartition(breakpoints(t))


def partition_to_tree(p: SDPartition | Iterable[Dyadic]) -> Tree:
    points = p.breakpoints if isinstance(p, SDPartition) else tuple(sorted(set(p)))
    values = [d.value for d in points]
    if not values or values[0] != 0:
        raise ValueError("partition must start at 0")

    def build(lo: Fraction, hi: Fraction, inner: list[Fraction]) -> Tree:
        if not inner:
            return LEAF
        mid = (lo + hi) / 2
        if mid not in inner:
            raise ValueError(f"breakpoints inside [{lo},{hi}) do not form a dyadic partition")
        return Tree(
            build(lo, mid, [v for v in inner if v < mid]),
            build(mid, hi, [v for v in inner if v > mid]),
        )

    return build(Fraction(0), Fraction(1), values[1:])


def leq(s: Tree, t: Tree) -> Forest | None:
    """The forest f with compose(f, s) == t, or None when s is not a rooted subtree of t."""
    out: list[Tree] = []

    def match(a: Tree, b: Tree) -> bool:
        if a.left is None:
            out.append(b)
            return True
        if b.left is None:
            return False
        return match(a.left, b.left) and match(a.right, b.right)

    return Forest(out) if match(s, t) else None


def common_refinement(t: Tree, s: Tree) -> tuple[Forest, Forest]:
    union = partition_to_tree(set(breakpoints(t)) | set(breakpoints(s)))
    return leq(t, union), leq(s, union)


def join(t: Tree, s: Tree) -> Tree:
    """Smallest tree containing both t and s."""
    p, _ = common_refinement(t, s)
    return graft_tree(t, p)


def meet(t: Tree, s: Tree) -> Tree:
    """Largest tree contained in both t and s."""
    if t.left is None or s.left is None:
        return LEAF
    return Tree(meet(t.left, s.left), meet(t.right, s.right))


def sibling_carets(t: Tree) -> list[int]:
    """Leaf indices k (1-based) such that leaves k and k+1 hang from one node."""
    out: list[int] = []
    counter = 0

    def walk(tree: Tree) -> None:
        nonlocal counter
        if tree.left is None:
            counter += 1
            return
        if tree.left.left is None and tree.right.left is None:
            out.append(counter + 1)
            counter += 2
            return
        walk(tree.left)
        walk(tree.right)

    walk(t)
    return out


def collapse_caret(t: Tree, k: int) -> Tree:
    """Replace the caret formed by leaves k, k+1 with a single leaf."""
    def walk(tree: Tree, start: int) -> Tree:
        if tree.left is None:
            return tree
        if start == k and tree.n_leaves == 2:
            return LEAF
        mid = start + tree.left.n_leaves
        if k < mid:
            return Tree(walk(tree.left, start), tree.right)
        return Tree(tree.left, walk(tree.right, mid))

    out = walk(t, 1)
    if out.n_leaves != t.n_leaves - 1:
        raise ValueError(f"leaves {k},{k + 1} do not form a caret")
    return out


# permutations: one-based image lists, p[i-1] is the image of i

def identity_perm(n: int) -> Permutation:
    return tuple(range(1, n + 1))


def check_perm(p: Sequence[int]) -> Permutation:
    p = tuple(p)
    if sorted(p) != list(range(1, len(p) + 1)):
        raise ValueError(f"{list(p)} is not a permutation")
    return p


def perm_compose(a: Permutation, b: Permutation) -> Permutation:
    """The map i -> a(b(i))."""
    if len(a) != len(b):
        raise ValueError("permutation sizes differ")
    return tuple(a[x - 1] for x in b)


def perm_inverse(a: Permutation) -> Permutation:
    out = [0] * len(a)
    for i, x in enumerate(a, 1):
        out[x - 1] = i
    return tuple(out)


def cyclic_shift(n: int, c: int) -> Permutation:
    return tuple((i - 1 + c) % n + 1 for i in range(1, n + 1))


def permute_trees(p: Sequence[Tree], tau: Permutation) -> Forest:
    """The forest whose i-th tree is the tau(i)-th tree of p."""
    if len(tau) != len(p):
        raise ValueError("permutation size differs from root count")
    return Forest(p[tau[i] - 1] for i in range(len(tau)))


def block_permutation(p: Sequence[Tree], tau: Permutation) -> Permutation:
    """Strand i of tau widened to as many strands as tree tau(i) of p has leaves."""
    counts = [t.n_leaves for t in p]
    top = [0]
    for c in counts:
        top.append(top[-1] + c)
    out: list[int] = []
    for i in range(len(tau)):
        j = tau[i] - 1
        out.extend(top[j] + r + 1 for r in range(counts[j]))
    return tuple(out)


class SymmetricForest:
    __slots__ = ("forest", "perm")

    def __init__(self, forest: Sequence[Tree], perm: Sequence[int] | None = None):
        self.forest = Forest(forest)
        self.perm = identity_perm(self.forest.leaves) if perm is None else check_perm(perm)
        if len(self.perm) != self.forest.leaves:
            raise ValueError("permutation size must equal the leaf count")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SymmetricForest)
            and self.forest == other.forest
            and self.perm == other.perm
        )

    def __hash__(self) -> int:
        return hash((self.forest, self.perm))

    def __repr__(self) -> str:
        return f"SymmetricForest({self.forest}, {list(self.perm)})"


def sym_compose(a: SymmetricForest, b: SymmetricForest) -> SymmetricForest:
    p, sigma = a.forest, a.perm
    q, tau = b.forest, b.perm
    if p.roots != q.leaves:
        raise ValueError(f"cannot compose: {p.roots} roots over {q.leaves} leaves")
    forest = compose(permute_trees(p, tau), q)
    return SymmetricForest(forest, perm_compose(sigma, block_permutation(p, tau)))


def parse_tree(text: str) -> Tree:
    tree, pos = _parse_tree_at(text, 0)
    pos = _skip(text, pos)
    if pos != len(text):
        raise ValueError(f"unexpected {text[pos]!r} at position {pos} in tree text")
    return tree


def _skip(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_tree_at(text: str, pos: int) -> tuple[Tree, int]:
    pos = _skip(text, pos)
    if pos >= len(text):
        raise ValueError("tree text ended early")
    ch = text[pos]
    if ch == "*":
        return LEAF, pos + 1
    if ch != "(":
        raise ValueError(f"unexpected {ch!r} at position {pos} in tree text")
    left, pos = _parse_tree_at(text, pos + 1)
    right, pos = _parse_tree_at(text, pos)
    pos = _skip(text, pos)
    if pos >= len(text) or text[pos] != ")":
        raise ValueError(f"expected ')' at position {pos} in tree text")
    return Tree(left, right), pos + 1


def parse_forest(text: str) -> Forest:
    trees = []
    pos = 0
    while True:
        tree, pos = _parse_tree_at(text, pos)
        trees.append(tree)
        pos = _skip(text, pos)
        if pos == len(text):
            return Forest(trees)
        if text[pos] != ",":
            raise ValueError(f"unexpected {text[pos]!r} at position {pos} in forest text")
        pos += 1


def parse_perm(text: str) -> Permutation:
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError(f"cannot parse permutation {text!r}")
    return check_perm(int(x) for x in body[1:-1].split(",") if x.strip())
