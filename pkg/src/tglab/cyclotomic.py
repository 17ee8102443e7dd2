"""Exact arithmetic in the cyclotomic field Q(zeta_N).

Numbers are kept as rational combinations of the powers zeta_N**j, 0 <= j < N
(the group ring of Z/N); two such vectors name the same number exactly when their
difference is divisible by the N-th cyclotomic polynomial.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _exact_divide(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    num = num[:]
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        q = num[i + len(den) - 1] // den[-1]
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    if any(num):
        raise ArithmeticError("polynomial division left a remainder")
    return out


class Cyclotomic:
    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: dict[int, Fraction] | None = None):
        self.order = order
        merged: dict[int, Fraction] = {}
        for j, c in (coeffs or {}).items():
            merged[j % order] = merged.get(j % order, 0) + Fraction(c)
        self.coeffs = {j: c for j, c in merged.items() if c}

    @classmethod
    def rational(cls, order: int, q) -> Cyclotomic:
        return cls(order, {0: Fraction(q)})

    @classmethod
    def root(cls, order: int, power: int = 1) -> Cyclotomic:
        return cls(order, {power % order: Fraction(1)})

    @classmethod
    def gaussian(cls, order: int, re, im) -> Cyclotomic:
        if order % 4:
            raise ValueError("the imaginary unit needs an order divisible by 4")
        return cls(order, {0: Fraction(re), order // 4: Fraction(im)})

    def _coerce(self, other) -> Cyclotomic:
        if isinstance(other, Cyclotomic):
            if other.order != self.order:
                raise ValueError("cyclotomic orders differ")
            return other
        if isinstance(other, (int, Fraction)):
            return Cyclotomic.rational(self.order, other)
        return NotImplemented

    def __add__(self, other) -> Cyclotomic:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out.get(j, 0) + c
        return Cyclotomic(self.order, out)

    __radd__ = __add__

    def __neg__(self) -> Cyclotomic:
        return Cyclotomic(self.order, {j: -c for j, c in self.coeffs.items()})

    def __sub__(self, other) -> Cyclotomic:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> Cyclotomic:
        return (-self) + other

    def __mul__(self, other) -> Cyclotomic:
        if isinstance(other, (int, Fraction)):
            return Cyclotomic(self.order, {j: c * other for j, c in self.coeffs.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[int, Fraction] = {}
        n = self.order
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                key = (i + j) % n
                out[key] = out.get(key, 0) + a * b
        return Cyclotomic(n, out)

    __rmul__ = __mul__

    def lift(self, order: int) -> Cyclotomic:
        if order % self.order:
            raise ValueError("target order must be a multiple")
        step = order // self.order
        return Cyclotomic(order, {j * step: c for j, c in self.coeffs.items()})

    def is_zero(self) -> bool:
        if not self.coeffs:
            return True
        poly = [Fraction(0)] * self.order
        for j, c in self.coeffs.items():
            poly[j] = c
        phi = cyclotomic_polynomial(self.order)
        deg = len(phi) - 1
        for i in range(len(poly) - 1, deg - 1, -1):
            lead = poly[i]
            if lead:
                for j, c in enumerate(phi):
                    poly[i - deg + j] -= lead * c
        return not any(poly[:deg])

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __complex__(self) -> complex:
        return sum(
            (float(c) * cmath.exp(2j * cmath.pi * j / self.order) for j, c in self.coeffs.items()),
            0j,
        )

    def __abs__(self) -> float:
        return abs(complex(self))

    def __repr__(self) -> str:
        return f"Cyclotomic({self.order}, {complex(self):.6g})"


def common_order(*orders: int) -> int:
    out = 1
    for n in orders:
        out = out * n // gcd(out, n)
    return out
