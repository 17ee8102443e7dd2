"""Heat-kernel measures on the integers and the Kakutani analysis of their infinite products.

The measure m_b puts mass exp(-n^2 b / 2) / Z_b on n.  Partition sums switch to the
Jacobi-Poisson dual series below b = 2*pi so every evaluation converges in a few terms.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.special import erfcx

from .dyadic import Dyadic, SDPartition, dyadics_at_level, ell, enumerate_dyadics, parse_partition
from .thompson import GENERATOR_A, VElement, act_dyadic, parse_element, rotation, rotation_angle

TWO_PI = 2 * math.pi
_REL_CUT = 1e-17


def _theta_tail(c: float) -> float:
    """sum_{n >= 1} exp(-c n^2)."""
    total, n = 0.0, 1
    while True:
        term = math.exp(-c * n * n)
        total += term
        if term <= _REL_CUT * max(total, 1.0) or term == 0.0:
            return total
        n += 1


def _check_positive(*values: float) -> None:
    for v in values:
        if not v > 0:
            raise ValueError(f"parameter must be positive, got {v}")


def partition_function(b: float) -> float:
    _check_positive(b)
    if b >= TWO_PI:
        return 1.0 + 2.0 * _theta_tail(b / 2)
    return math.sqrt(TWO_PI / b) * (1.0 + 2.0 * _theta_tail(2 * math.pi**2 / b))


def log_partition_function(b: float) -> float:
    _check_positive(b)
    if b >= TWO_PI:
        return math.log1p(2.0 * _theta_tail(b / 2))
    return 0.5 * math.log(TWO_PI / b) + math.log1p(2.0 * _theta_tail(2 * math.pi**2 / b))


@dataclass(frozen=True)
class HeatKernel:
    b: float

    def __post_init__(self):
        _check_positive(self.b)

    @property
    def Z(self) -> float:
        return partition_function(self.b)

    def mass(self, n: int) -> float:
        return mass(self.b, n)


def mass(b: float, n: int) -> float:
    _check_positive(b)
    return math.exp(-n * n * b / 2 - log_partition_function(b))


def mass_set(b: float, values: Iterable[int]) -> float:
    _check_positive(b)
    logz = log_partition_function(b)
    return math.fsum(math.exp(-n * n * b / 2 - logz) for n in set(values))


def upper_tail(b: float, start: int) -> float:
    """m_b({n >= start})."""
    _check_positive(b)
    if start <= 0:
        return 1.0 - upper_tail(b, 1 - start)
    if start * start * b / 2 > 800:
        return 0.0
    logz = log_partition_function(b)
    if start * start * b / 2 < 2:
        inner = np.arange(1, start, dtype=float)
        central = math.exp(-logz) * (1.0 + 2.0 * math.fsum(np.exp(-inner * inner * b / 2)))
        return max(0.0, (1.0 - central) / 2)
    lead = start * start * b / 2
    if start * b < 1e-3:
        # Euler-Maclaurin: integral plus boundary corrections; the next term is O((start b)^3)
        x = start * math.sqrt(b / 2)
        body = math.sqrt(math.pi / (2 * b)) * float(erfcx(x)) + 0.5 + start * b / 12
        return body * math.exp(-lead - logz)
    stop = math.ceil(math.sqrt(start * start + 80.0 / b)) + 1
    n = np.arange(start, stop, dtype=float)
    total = math.fsum(np.exp(-(n * n * b / 2 - lead)))
    return total * math.exp(-lead - logz)


def mass_interval(b: float, lo: int | None, hi: int | None) -> float:
    """m_b of the integers in [lo, hi]; None stands for an infinite end."""
    missing = 0.0
    if hi is not None:
        missing += upper_tail(b, hi + 1)
    if lo is not None:
        missing += upper_tail(b, 1 - lo)
    return max(0.0, 1.0 - missing)


def neg_log_mass_interval(b: float, lo: int | None, hi: int | None) -> float:
    missing = 0.0
    if hi is not None:
        missing += upper_tail(b, hi + 1)
    if lo is not None:
        missing += upper_tail(b, 1 - lo)
    if missing >= 1.0:
        return math.inf
    return -math.log1p(-missing)


# Hellinger affinities


def _odd_theta(c: float) -> float:
    """sum over odd n >= 1 of exp(-c n^2)."""
    total, n = 0.0, 1
    while True:
        term = math.exp(-c * n * n)
        total += term
        if term <= _REL_CUT * max(total, 1e-300) or term == 0.0:
            return total
        n += 2


def neg_log_translate(b: float, k: int) -> float:
    """-log rho(k_* m_b, m_b)."""
    _check_positive(b)
    base = k * k * b / 8
    if k % 2 == 0:
        return base
    if b < TWO_PI:
        q = 2 * math.pi**2 / b
        theta3 = 1.0 + 2.0 * _theta_tail(q)
        return base - math.log1p(-4.0 * _odd_theta(q) / theta3)
    return base - math.log(2.0 * _odd_theta(b / 8)) + log_partition_function(b)


def hellinger_translate(b: float, k: int) -> float:
    return math.exp(-neg_log_translate(b, k))


def neg_log_pair(a: float, b: float) -> float:
    """-log rho(m_a, m_b) from rho = Z_{(a+b)/2} / sqrt(Z_a Z_b)."""
    _check_positive(a, b)
    if a == b:
        return 0.0
    c = (a + b) / 2
    if max(a, b) < TWO_PI:
        lead = 0.25 * math.log1p((a - b) ** 2 / (4 * a * b))
        corr = [math.log1p(2.0 * _theta_tail(2 * math.pi**2 / x)) for x in (a, b, c)]
        value = lead + 0.5 * corr[0] + 0.5 * corr[1] - corr[2]
    else:
        value = 0.5 * log_partition_function(a) + 0.5 * log_partition_function(b) - log_partition_function(c)
    return max(value, 0.0)


def hellinger_pair(a: float, b: float) -> float:
    return math.exp(-neg_log_pair(a, b))


# beta profiles


def level_count(n: int) -> int:
    """Number of dyadics d with ell(d) = n."""
    return 1 if n == 0 else 1 << (n - 1)


class BetaProfile:
    """A positive weight beta(d) for every dyadic d."""

    ell_based = True

    def at_level(self, n: int) -> float:
        raise NotImplementedError

    def __call__(self, d: Dyadic) -> float:
        return self.at_level(ell(d))

    def tail_sum(self, p: float, level: int) -> float | None:
        """sum of beta(d)^p over ell(d) > level in closed form; inf if divergent, None if unknown."""
        return None

    def sup_beyond(self, level: int) -> float | None:
        return None


@dataclass(frozen=True)
class Constant(BetaProfile):
    c: float

    def __post_init__(self):
        _check_positive(self.c)

    def at_level(self, n: int) -> float:
        return self.c

    def tail_sum(self, p: float, level: int) -> float:
        return math.inf

    def sup_beyond(self, level: int) -> float:
        return self.c

    def __str__(self) -> str:
        return f"const:{self.c:g}"


@dataclass(frozen=True)
class Tau(BetaProfile):
    """beta(d) = (d' - d)^tau for the largest s.d.i. [d, d')."""

    tau: float

    def __post_init__(self):
        _check_positive(self.tau)

    def at_level(self, n: int) -> float:
        return 2.0 ** (-n * self.tau)

    def tail_sum(self, p: float, level: int) -> float:
        r = 2.0 ** (1 - p * self.tau)
        if r >= 1:
            return math.inf
        return 0.5 * r ** (level + 1) / (1 - r)

    def sup_beyond(self, level: int) -> float:
        return 2.0 ** (-(level + 1) * self.tau)

    def __str__(self) -> str:
        return f"tau:{self.tau:g}"


@dataclass(frozen=True)
class EllTable(BetaProfile):
    """beta by ell-level: table values, then geometric decay by ratio past the table."""

    values: tuple[float, ...]
    ratio: float = 1.0

    def __post_init__(self):
        if not self.values:
            raise ValueError("an ell table needs at least one value")
        _check_positive(*self.values, self.ratio)

    def at_level(self, n: int) -> float:
        last = len(self.values) - 1
        if n <= last:
            return self.values[n]
        return self.values[last] * self.ratio ** (n - last)

    def tail_sum(self, p: float, level: int) -> float:
        last = len(self.values) - 1
        head = math.fsum(level_count(n) * self.values[n] ** p for n in range(level + 1, last + 1))
        q = 2 * self.ratio**p
        if q >= 1:
            return math.inf
        start = max(level, last) + 1
        # sum_{n >= start} 2^(n-1) (b_last r^(n-last))^p
        first = level_count(start) * self.at_level(start) ** p
        return head + first / (1 - q)

    def sup_beyond(self, level: int) -> float:
        last = len(self.values) - 1
        head = [self.values[n] for n in range(level + 1, last + 1)]
        tail_start = self.at_level(max(level, last) + 1)
        tail = tail_start if self.ratio <= 1 else math.inf
        return max(head + [tail])

    def __str__(self) -> str:
        body = ",".join(f"{v:g}" for v in self.values)
        return f"ell:{body};geom:{self.ratio:g}"


class Custom(BetaProfile):
    """An arbitrary callable beta; only numerical analysis applies."""

    ell_based = False

    def __init__(self, fn: Callable[[Dyadic], float], name: str = "custom"):
        self.fn = fn
        self.name = name

    def __call__(self, d: Dyadic) -> float:
        return self.fn(d)

    def __str__(self) -> str:
        return self.name


def parse_beta(text: str) -> BetaProfile:
    text = text.strip()
    if m := re.fullmatch(r"const:([^;]+)", text):
        return Constant(float(m.group(1)))
    if m := re.fullmatch(r"tau:([^;]+)", text):
        return Tau(float(m.group(1)))
    if m := re.fullmatch(r"ell:([^;]+)(?:;geom:(.+))?", text):
        values = tuple(float(v) for v in m.group(1).split(","))
        return EllTable(values, float(m.group(2)) if m.group(2) else 1.0)
    raise ValueError(f"cannot parse beta profile {text!r}")


# piecewise constant integer maps


@dataclass(frozen=True)
class ZfrElement:
    partition: SDPartition
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.partition.breakpoints):
            raise ValueError("one value per partition interval is required")

    def __call__(self, d: Dyadic) -> int:
        out = self.values[0]
        for b, v in zip(self.partition.breakpoints, self.values):
            if b <= d:
                out = v
        return out

    @property
    def max_abs(self) -> int:
        return max(abs(v) for v in self.values)

    def __str__(self) -> str:
        return f"{self.partition}@{','.join(map(str, self.values))}"


def parse_zfr(text: str) -> ZfrElement:
    part, _, vals = text.partition("@")
    if not vals:
        raise ValueError(f"expected <partition>@<values>, got {text!r}")
    return ZfrElement(parse_partition(part), tuple(int(v) for v in vals.split(",")))


def radon_nikodym(
    g: ZfrElement, beta: BetaProfile, x: Mapping[Dyadic, int], max_level: int
) -> float:
    """Density of the shifted product measure against the original at the point x."""
    log_density = 0.0
    for d in enumerate_dyadics(max_level):
        k = g(d)
        if k == 0:
            continue
        if d not in x:
            raise ValueError(f"coordinate {d} is needed but missing")
        b = beta(d)
        log_density += (2 * x[d] * k - k * k) * b / 2
    return math.exp(log_density)


# Kakutani analysis


@dataclass(frozen=True)
class Translate:
    g: ZfrElement

    def __str__(self) -> str:
        return f"translate:{self.g}"


@dataclass(frozen=True)
class Halve:
    def __str__(self) -> str:
        return "halve"


@dataclass(frozen=True)
class Rotate:
    n: int
    k: int

    def __str__(self) -> str:
        return f"rotate:{self.n},{self.k}"


@dataclass(frozen=True)
class Precompose:
    v: VElement

    def __str__(self) -> str:
        return f"precompose:{self.v}"


Transform = Translate | Halve | Rotate | Precompose


def parse_transform(text: str) -> Transform:
    text = text.strip()
    if text == "halve":
        return Halve()
    if text.startswith("translate:"):
        return Translate(parse_zfr(text[len("translate:") :]))
    if m := re.fullmatch(r"rotate:(\d+),(-?\d+)", text):
        return Rotate(int(m.group(1)), int(m.group(2)))
    if text.startswith("precompose:"):
        return Precompose(parse_element(text[len("precompose:") :]))
    raise ValueError(f"cannot parse transform {text!r}")


def transform_element(transform: Transform) -> VElement | None:
    if isinstance(transform, Halve):
        return GENERATOR_A
    if isinstance(transform, Rotate):
        return rotation(transform.n, transform.k)
    if isinstance(transform, Precompose):
        return transform.v
    return None


class Verdict(str, Enum):
    EQUIVALENT = "Equivalent"
    SINGULAR = "Singular"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class KakutaniReport:
    beta: str
    transform: str
    levels: list[int]
    terms_by_level: list[float]
    partial_sums: list[float]
    max_term_by_level: list[float]
    nonzero_by_level: list[int]
    verdict: Verdict
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "transform": self.transform,
            "levels": self.levels,
            "terms_by_level": self.terms_by_level,
            "partial_sums": self.partial_sums,
            "max_term_by_level": self.max_term_by_level,
            "nonzero_by_level": self.nonzero_by_level,
            "verdict": self.verdict.value,
            "evidence": self.evidence,
        }


# Above b = 2*pi the bound below is not claimed; it holds for every b <= 2*pi:
#   -log rho(k_* m_b, m_b) <= (k^2/8 + 1/10) b
TRANSLATE_SLOPE_EXTRA = 0.1


def _translate_terms(beta: BetaProfile, g: ZfrElement, level: int) -> list[float]:
    cache: dict[tuple[float, int], float] = {}
    out = []
    for d in dyadics_at_level(level):
        key = (beta(d), g(d))
        if key not in cache:
            cache[key] = neg_log_translate(*key) if key[1] else 0.0
        out.append(cache[key])
    return out


def _precompose_terms(beta: BetaProfile, v: VElement, level: int) -> list[float]:
    cache: dict[tuple[float, float], float] = {}
    out = []
    for d in dyadics_at_level(level):
        key = (beta(act_dyadic(v, d)), beta(d))
        if key not in cache:
            cache[key] = neg_log_pair(*key)
        out.append(cache[key])
    return out


def kakutani_series(
    beta: BetaProfile,
    transform: Transform,
    max_level: int,
    singular_floor: float = 1e-3,
) -> KakutaniReport:
    if max_level < 1:
        raise ValueError("max_level must be at least 1")
    v = transform_element(transform)
    levels = list(range(max_level + 1))
    sums, maxima, nonzero = [], [], []
    for n in levels:
        terms = (
            _translate_terms(beta, transform.g, n)
            if isinstance(transform, Translate)
            else _precompose_terms(beta, v, n)
        )
        sums.append(math.fsum(terms))
        maxima.append(max(terms))
        nonzero.append(sum(1 for t in terms if t > 0))
    partial = list(np.cumsum(sums).tolist())
    report = KakutaniReport(
        str(beta), str(transform), levels, sums, partial, maxima, nonzero, Verdict.INCONCLUSIVE
    )
    if isinstance(transform, Translate):
        _certify_translate(report, beta, transform.g, max_level)
    else:
        _certify_precompose(report, beta, v, max_level)
    if report.verdict is Verdict.INCONCLUSIVE:
        _numeric_verdict(report, singular_floor)
    return report


def _certify_translate(report: KakutaniReport, beta: BetaProfile, g: ZfrElement, level: int) -> None:
    if g.max_abs == 0:
        report.verdict = Verdict.EQUIVALENT
        report.evidence = {"method": "analytic", "reason": "the shift is trivial; every term is 0"}
        return
    if isinstance(beta, Constant):
        report.verdict = Verdict.SINGULAR
        report.evidence = {
            "method": "analytic",
            "reason": "beta is constant, so the same positive term recurs at infinitely many coordinates",
            "repeated_term": neg_log_translate(beta.c, next(v for v in g.values if v)),
        }
        return
    tail = beta.tail_sum(1.0, level)
    sup = beta.sup_beyond(level)
    if tail is None or sup is None or math.isinf(tail) or sup > TWO_PI:
        return
    slope = g.max_abs**2 / 8 + TRANSLATE_SLOPE_EXTRA
    bound = slope * tail
    report.verdict = Verdict.EQUIVALENT
    report.evidence = {
        "method": "geometric-tail",
        "tail_bound": bound,
        "total_upper_bound": report.partial_sums[-1] + bound,
        "reason": "terms beyond the last level are at most (k^2/8 + 1/10) beta(d) and beta is summable",
    }


def _certify_precompose(report: KakutaniReport, beta: BetaProfile, v: VElement, level: int) -> None:
    if isinstance(beta, Constant):
        report.verdict = Verdict.EQUIVALENT
        report.evidence = {"method": "analytic", "reason": "beta is constant; every term is 0"}
        return
    angle = rotation_angle(v)
    if angle is not None and beta.ell_based:
        support = rotation_support(v, level)
        report.verdict = Verdict.EQUIVALENT
        report.evidence = {
            "method": "finite-support",
            "support": [str(d) for d in support],
            "grid_level": angle.level,
            "reason": "a rotation by j/2^n preserves ell(d) whenever ell(d) > n",
        }


def _numeric_verdict(report: KakutaniReport, floor: float) -> None:
    last = report.terms_by_level[-3:]
    if len(last) == 3 and min(last) >= floor and all(b >= a for a, b in zip(last, last[1:])):
        report.verdict = Verdict.SINGULAR
        report.evidence = {
            "method": "level-lower-bound",
            "levels": report.levels[-3:],
            "level_sums": last,
            "floor": floor,
            "reason": "the last three level sums stay above the floor without decreasing",
        }
    else:
        report.evidence = {
            "method": "none",
            "reason": "no tail certificate and no sustained lower bound at the examined levels",
        }


def halve_term_limit(tau: float) -> float:
    """Small-beta limit of -log rho(m_{beta 2^-tau}, m_beta)."""
    return -0.5 * math.log(2 / (2 ** (tau / 2) + 2 ** (-tau / 2)))


# summability


@dataclass(frozen=True)
class Summable:
    value: float


@dataclass(frozen=True)
class Divergent:
    pass


@dataclass(frozen=True)
class NumericOnly:
    partial_sums: tuple[float, ...]


def summability_test(beta: BetaProfile, p: float, max_level: int = 20):
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if beta.ell_based:
        tail = beta.tail_sum(p, 0)
        if tail is not None:
            if math.isinf(tail):
                return Divergent()
            return Summable(beta.at_level(0) ** p + tail)
    partial, acc = [], 0.0
    for n in range(max_level + 1):
        acc += math.fsum(beta(d) ** p for d in dyadics_at_level(n))
        partial.append(acc)
    return NumericOnly(tuple(partial))


# semifiniteness series


def _theta_complex(z: complex) -> complex:
    """sum over all integers k of exp(-k^2 z), Re z > 0."""
    dual = math.pi**2 / z
    if dual.real >= z.real:
        series = 1.0 + 2.0 * _complex_tail(dual)
        return cmath.sqrt(math.pi / z) * series
    return 1.0 + 2.0 * _complex_tail(z)


def _complex_tail(z: complex) -> complex:
    total, n = 0j, 1
    while True:
        term = cmath.exp(-z * n * n)
        total += term
        if abs(term) <= _REL_CUT * max(abs(total), 1.0):
            return total
        n += 1


def semifinite_term(b: float, t: float) -> float:
    """1 - |Tr h^(1+it)| for the heat kernel m_b."""
    _check_positive(b)
    if t == 0:
        return 0.0
    s = _theta_complex(b * (1 + 1j * t) / 2)
    return 1.0 - abs(s) / partition_function(b)


def semifinite_limit(t: float) -> float:
    return 1.0 - (1.0 + t * t) ** -0.25


@dataclass
class SemifiniteReport:
    beta: str
    t: float
    levels: list[int]
    terms_by_level: list[float]
    level_sums: list[float]
    partial_sums: list[float]
    limit: float
    divergent: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def semifinite_series(beta: BetaProfile, t: float, max_level: int) -> SemifiniteReport:
    levels = list(range(max_level + 1))
    reps, sums = [], []
    for n in levels:
        if beta.ell_based:
            term = semifinite_term(beta.at_level(n), t)
            reps.append(term)
            sums.append(term * level_count(n))
        else:
            terms = [semifinite_term(beta(d), t) for d in dyadics_at_level(n)]
            reps.append(min(terms))
            sums.append(math.fsum(terms))
    limit = semifinite_limit(t)
    tail = reps[-3:]
    divergent = limit > 0 and len(tail) == 3 and min(tail) > limit / 2
    return SemifiniteReport(
        str(beta), t, levels, reps, sums, list(np.cumsum(sums).tolist()), limit, divergent
    )


# closure diagnostic


def closure_set(b: float, p: float) -> tuple[int | None, int | None]:
    """Integers n with |exp((2n-1) b / 2) - 1| <= b^p, as an inclusive range."""
    _check_positive(b)
    eps = b**p
    hi = math.floor(0.5 + math.log1p(eps) / b)
    lo = None if eps >= 1 else math.ceil(0.5 + math.log1p(-eps) / b)
    return lo, hi


def closure_mass(b: float, p: float) -> float:
    return mass_interval(b, *closure_set(b, p))


def closure_diagnostic(
    beta: BetaProfile, p: float, n: int, max_level: int | None = None
) -> float:
    """Product measure of the cylinder over the dyadics in (0, 2^-n)."""
    if not 0 < p < 0.5:
        raise ValueError("p must lie in (0, 1/2)")
    if n < 0:
        raise ValueError("n must be nonnegative")
    cap = max_level if max_level is not None else (2000 if beta.ell_based else 14)
    total = 0.0
    for level in range(n + 1, cap + 1):
        count = 1 << (level - n - 1)
        if beta.ell_based:
            term = neg_log_mass_interval(beta.at_level(level), *closure_set(beta.at_level(level), p))
            contribution = count * term
        else:
            step = 1 << (level - n)
            points = [d for d in dyadics_at_level(level) if d.numerator < (1 << level) // step]
            contribution = math.fsum(
                neg_log_mass_interval(beta(d), *closure_set(beta(d), p)) for d in points
            )
        total += contribution
        if math.isinf(total):
            return 0.0
        if max_level is None and beta.ell_based and contribution < 1e-300:
            break
    return math.exp(-total)


# rotations


def rotation_support(r: VElement, max_level: int) -> list[Dyadic]:
    if rotation_angle(r) is None:
        raise ValueError("element is not a rotation of the torus")
    return [d for d in enumerate_dyadics(max_level) if ell(d) != ell(act_dyadic(r, d))]
