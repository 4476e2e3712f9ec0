"""
Real Roots Module
=================
Univariate real-root counting, isolation and refinement, plus exact sign
evaluation at real algebraic numbers.

Responsibilities:
- IsolInterval / AlgebraicNumber value types
- Root isolation with exact detection of rational roots
- Sturm counting, bisection refinement, open-cell sample points
- Exact sign of a polynomial at an algebraic number, decimal approximation
"""

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import sympy

from src.algebra.polyring import (
    MultiPoly,
    Scalar,
    canonical,
    eval_at,
    multivar_gcd,
    substitute,
    to_fraction,
)
from src.errors import UsageError

logger = logging.getLogger(__name__)


# ============================================================================
# VALUE TYPES
# ============================================================================

@dataclass(frozen=True)
class IsolInterval:
    """Closed rational interval [lo, hi]; lo == hi marks an exact (rational) root."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = to_fraction(self.lo), to_fraction(self.hi)
        if lo > hi:
            raise UsageError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: Scalar) -> bool:
        return self.lo <= to_fraction(value) <= self.hi

    def as_strings(self) -> Tuple[str, str]:
        return str(self.lo), str(self.hi)


@dataclass(frozen=True)
class AlgebraicNumber:
    """
    A real algebraic number: the unique root of ``defpoly`` in ``interval``.

    Non-degenerate intervals never have a root of ``defpoly`` at an endpoint,
    so the defining polynomial changes sign across them.
    """

    defpoly: MultiPoly
    interval: IsolInterval
    rational_value: Optional[Fraction] = None

    def __post_init__(self):
        if len(self.defpoly.used_variables()) != 1:
            raise UsageError(f"defining polynomial must be univariate: {self.defpoly.render()}")
        if self.interval.is_degenerate:
            value = self.interval.lo
            if self.rational_value is not None and self.rational_value != value:
                raise UsageError("rational value disagrees with the degenerate interval")
            if eval_at(self.defpoly, {self.variable: value}) != 0:
                raise UsageError(f"{value} is not a root of {self.defpoly.render()}")
            object.__setattr__(self, 'rational_value', value)
        elif self.rational_value is not None:
            raise UsageError("rational value given with a non-degenerate interval")

    @classmethod
    def from_rational(cls, value: Scalar, var: str = 'k') -> "AlgebraicNumber":
        value = to_fraction(value)
        defpoly = canonical(MultiPoly.variable(var) - value)
        return cls(defpoly, IsolInterval(value, value), value)

    @property
    def variable(self) -> str:
        return self.defpoly.used_variables()[0]

    @property
    def is_rational(self) -> bool:
        return self.rational_value is not None

    def approx(self, digits: int = 10) -> str:
        return algnum_approx(self, digits)

    def __float__(self) -> float:
        if self.is_rational:
            return float(self.rational_value)
        return float(refine_to_width(self, Fraction(1, 10 ** 17)).interval.midpoint)

    def __str__(self) -> str:
        if self.is_rational:
            return str(self.rational_value)
        return (f"root of {self.defpoly.render()} in "
                f"[{self.interval.lo}, {self.interval.hi}]")


# ============================================================================
# INTEGER HELPERS
# ============================================================================

def _univariate_var(p: MultiPoly) -> Optional[str]:
    used = p.used_variables()
    if len(used) > 1:
        raise UsageError(f"expected a univariate polynomial, got variables {used}")
    return used[0] if used else None


@lru_cache(maxsize=512)
def _dense_int(p: MultiPoly) -> Tuple[int, ...]:
    """Ascending integer coefficients of the canonical form of a univariate p."""
    c = canonical(p).trim()
    if not c.variables:
        return (int(c.constant_value()),)
    degree = c.degree(c.variables[0])
    coeffs = [0] * (degree + 1)
    for (e,), value in c.terms.items():
        coeffs[e] = int(value)
    return tuple(coeffs)


def _sign_dense(coeffs: Sequence[int], value: Fraction) -> int:
    """Sign of the polynomial at n/d, by homogenized integer Horner."""
    n, d = value.numerator, value.denominator
    acc = coeffs[-1]
    dpow = 1
    for a in reversed(coeffs[:-1]):
        dpow *= d
        acc = acc * n + a * dpow
    return (acc > 0) - (acc < 0)


def sign_at(p: MultiPoly, value: Scalar) -> int:
    """Exact sign of a univariate polynomial at a rational."""
    if p.is_zero():
        return 0
    return _sign_dense(_dense_int(p), to_fraction(value))


def _sympy_poly(p: MultiPoly) -> sympy.Poly:
    return canonical(p).trim().to_poly()


def _is_squarefree(p: MultiPoly) -> bool:
    poly = _sympy_poly(p)
    return poly.gcd(poly.diff()).degree() == 0


# ============================================================================
# ISOLATION AND COUNTING
# ============================================================================

def isolate_real_roots(p: MultiPoly) -> List[IsolInterval]:
    """
    Isolate every real root of a squarefree univariate polynomial.

    Rational roots always come back as degenerate intervals: each interval
    is shrunk below 1/L (L the leading coefficient of the integer form),
    where at most one candidate n/L of the rational root theorem remains to
    test exactly.

    Args:
        p: Nonzero squarefree univariate polynomial

    Returns:
        Pairwise disjoint intervals sorted increasingly, one per root
    """
    if p.is_zero():
        raise UsageError("cannot isolate the roots of the zero polynomial")
    if _univariate_var(p) is None:
        return []
    if not _is_squarefree(p):
        raise UsageError(f"polynomial is not squarefree: {p.render()[:80]}")

    coeffs = _dense_int(p)
    lead = abs(coeffs[-1])
    poly = _sympy_poly(p)
    raw = poly.intervals(sqf=True)

    result = []
    for s, t in raw:
        lo, hi = to_fraction(s), to_fraction(t)
        if lo == hi:
            result.append(IsolInterval(lo, lo))
            continue
        if _sign_dense(coeffs, lo) == 0 or _sign_dense(coeffs, hi) == 0:
            interval = _detach_endpoints(coeffs, poly, lo, hi)
            if interval.is_degenerate:
                result.append(interval)
                continue
            lo, hi = interval.lo, interval.hi
        result.append(_settle_rational(coeffs, lead, lo, hi))

    result = sorted(set(result), key=lambda iv: iv.lo)
    logger.debug(f"Isolated {len(result)} real roots of a degree {len(coeffs) - 1} polynomial")
    return result


def _open_count(coeffs: Sequence[int], poly: sympy.Poly, lo: Fraction, hi: Fraction) -> int:
    """Roots strictly inside (lo, hi)."""
    closed = int(poly.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                                  sympy.Rational(hi.numerator, hi.denominator)))
    return closed - (_sign_dense(coeffs, lo) == 0) - (_sign_dense(coeffs, hi) == 0)


def _detach_endpoints(coeffs: Sequence[int], poly: sympy.Poly,
                      lo: Fraction, hi: Fraction) -> IsolInterval:
    """
    An isolating interval may end on a neighbouring rational root that has
    its own degenerate interval. Shrink it until no endpoint is a root and
    the single interior root stays inside.
    """
    if _open_count(coeffs, poly, lo, hi) == 0:
        root = lo if _sign_dense(coeffs, lo) == 0 else hi
        return IsolInterval(root, root)
    while _sign_dense(coeffs, lo) == 0 or _sign_dense(coeffs, hi) == 0:
        mid = (lo + hi) / 2
        if _sign_dense(coeffs, mid) == 0:
            return IsolInterval(mid, mid)
        if _open_count(coeffs, poly, lo, mid) == 1:
            hi = mid
        else:
            lo = mid
    return IsolInterval(lo, hi)


def _settle_rational(coeffs: Sequence[int], lead: int, lo: Fraction, hi: Fraction) -> IsolInterval:
    """Bisect (lo, hi) below width 1/lead, then test the remaining rational candidates."""
    sign_lo = _sign_dense(coeffs, lo)
    bound = Fraction(1, lead)
    while hi - lo >= bound:
        mid = (lo + hi) / 2
        s = _sign_dense(coeffs, mid)
        if s == 0:
            return IsolInterval(mid, mid)
        if s == sign_lo:
            lo = mid
        else:
            hi = mid
    for n in range(math.ceil(lo * lead), math.floor(hi * lead) + 1):
        candidate = Fraction(n, lead)
        if _sign_dense(coeffs, candidate) == 0:
            return IsolInterval(candidate, candidate)
    return IsolInterval(lo, hi)


def count_roots_in(p: MultiPoly, a: Scalar, b: Scalar) -> int:
    """Number of distinct real roots in (a, b) by Sturm sequences."""
    if p.is_zero():
        raise UsageError("cannot count the roots of the zero polynomial")
    a, b = to_fraction(a), to_fraction(b)
    if not a < b:
        raise UsageError(f"need a < b, got ({a}, {b})")
    if _univariate_var(p) is None:
        return 0
    if sign_at(p, a) == 0 or sign_at(p, b) == 0:
        raise UsageError(f"an endpoint of ({a}, {b}) is a root")
    return _count_closed(p, a, b)


def _count_closed(p: MultiPoly, a: Fraction, b: Fraction) -> int:
    poly = _sympy_poly(p)
    return int(poly.count_roots(sympy.Rational(a.numerator, a.denominator),
                                sympy.Rational(b.numerator, b.denominator)))


def real_roots(p: MultiPoly) -> List[AlgebraicNumber]:
    """The real roots of a squarefree univariate p as algebraic numbers, increasing."""
    defpoly = canonical(p).trim()
    return [AlgebraicNumber(defpoly, iv, iv.lo if iv.is_degenerate else None)
            for iv in isolate_real_roots(defpoly)]


# ============================================================================
# REFINEMENT
# ============================================================================

def refine_to_width(a: AlgebraicNumber, width: Scalar) -> AlgebraicNumber:
    """Bisect the isolating interval until it is no wider than ``width``."""
    width = to_fraction(width)
    if width <= 0:
        raise UsageError(f"width must be positive, got {width}")
    if a.is_rational or a.interval.width <= width:
        return a
    coeffs = _dense_int(a.defpoly)
    lo, hi = a.interval.lo, a.interval.hi
    sign_lo = _sign_dense(coeffs, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _sign_dense(coeffs, mid)
        if s == 0:
            return AlgebraicNumber(a.defpoly, IsolInterval(mid, mid), mid)
        if s == sign_lo:
            lo = mid
        else:
            hi = mid
    return replace(a, interval=IsolInterval(lo, hi))


def _bisect_once(a: AlgebraicNumber) -> AlgebraicNumber:
    return refine_to_width(a, a.interval.width / 2)


# ============================================================================
# SAMPLE POINTS
# ============================================================================

def simplest_between(a: Fraction, b: Fraction) -> Fraction:
    """The rational with the smallest denominator (then numerator) in the open interval (a, b)."""
    if not a < b:
        raise UsageError(f"empty open interval ({a}, {b})")
    if a < 0 < b:
        return Fraction(0)
    if b <= 0:
        return -simplest_between(-b, -a)
    floor_a = math.floor(a)
    if floor_a + 1 < b:
        return Fraction(floor_a + 1)
    if a == floor_a:
        y = Fraction(math.floor(1 / (b - floor_a)) + 1)
    else:
        y = simplest_between(1 / (b - floor_a), 1 / (a - floor_a))
    return floor_a + 1 / y


def sample_between(intervals: Sequence[IsolInterval]) -> List[Fraction]:
    """
    One rational below all intervals, one between each adjacent pair and one
    above all. Gaps get their simplest rational; intervals that touch at a
    non-root endpoint share that endpoint as the sample.
    """
    if not intervals:
        return [Fraction(0)]
    samples = [Fraction(math.ceil(intervals[0].lo) - 1)]
    for left, right in zip(intervals, intervals[1:]):
        if right.lo < left.hi:
            raise UsageError(f"overlapping intervals [{left.lo}, {left.hi}] and [{right.lo}, {right.hi}]")
        if right.lo == left.hi:
            if left.is_degenerate or right.is_degenerate:
                raise UsageError(f"intervals share the root {left.hi}")
            samples.append(left.hi)
        else:
            samples.append(simplest_between(left.hi, right.lo))
    samples.append(Fraction(math.floor(intervals[-1].hi) + 1))
    return samples


# ============================================================================
# SIGNS AND APPROXIMATION
# ============================================================================

def algnum_sign_at(a: AlgebraicNumber, q: MultiPoly) -> int:
    """
    Exact sign of q(α).

    Zero is decided through gcd(q, defpoly), which has a root in the
    interval iff it changes sign there. Otherwise the interval is bisected
    until q has no root in it.
    """
    var = _univariate_var(q)
    if var is not None and var != a.variable:
        raise UsageError(f"q is in {var!r}, the number is a root in {a.variable!r}")
    if q.is_zero():
        return 0
    if var is None:
        c = q.constant_value()
        return (c > 0) - (c < 0)
    if a.is_rational:
        return sign_at(q, a.rational_value)

    g = multivar_gcd(q, a.defpoly)
    if not g.is_constant():
        if sign_at(g, a.interval.lo) * sign_at(g, a.interval.hi) < 0:
            return 0

    current = a
    while True:
        lo, hi = current.interval.lo, current.interval.hi
        if _count_closed(q, lo, hi) == 0:
            return sign_at(q, lo)
        current = _bisect_once(current)
        if current.is_rational:
            return sign_at(q, current.rational_value)


def algnum_compare(a: AlgebraicNumber, value: Scalar) -> int:
    """Sign of α − value."""
    value = to_fraction(value)
    return algnum_sign_at(a, MultiPoly.variable(a.variable) - value)


def format_decimal(value: Fraction, digits: int) -> str:
    """Round ``value`` half-up to ``digits`` decimals, using integers only."""
    scaled = math.floor(value * 10 ** digits + Fraction(1, 2))
    sign = '-' if scaled < 0 else ''
    text = str(abs(scaled)).rjust(digits + 1, '0')
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def algnum_approx(a: AlgebraicNumber, digits: int) -> str:
    """Decimal string within 10^-digits of α."""
    if not isinstance(digits, int) or digits < 1:
        raise UsageError(f"digits must be a positive integer, got {digits!r}")
    if a.is_rational:
        return format_decimal(a.rational_value, digits)
    refined = refine_to_width(a, Fraction(1, 10 ** (digits + 2)))
    return format_decimal(refined.interval.midpoint, digits)


# ============================================================================
# DERIVED NUMBERS
# ============================================================================

def restrict_defpoly(a: AlgebraicNumber, q: MultiPoly) -> Optional[AlgebraicNumber]:
    """
    If α is a root of q, return α over gcd(defpoly, q); otherwise None.
    """
    if algnum_sign_at(a, q) != 0:
        return None
    if q.is_zero():
        return a
    g = canonical(multivar_gcd(a.defpoly, q)).trim()
    if a.is_rational:
        g = canonical(MultiPoly.variable(a.variable) - a.rational_value)
    return AlgebraicNumber(g, a.interval, a.rational_value)


def negate(a: AlgebraicNumber) -> AlgebraicNumber:
    """−α, with defining polynomial p(−k)."""
    var = a.variable
    defpoly = canonical(substitute(a.defpoly, var, -MultiPoly.variable(var))).trim()
    interval = IsolInterval(-a.interval.hi, -a.interval.lo)
    rational = -a.rational_value if a.is_rational else None
    return AlgebraicNumber(defpoly, interval, rational)


def positive_sqrt(r: Scalar, var: str = 'u') -> AlgebraicNumber:
    """+√r as a root of var² − r; rational when r is a perfect square."""
    r = to_fraction(r)
    if r < 0:
        raise UsageError(f"no real square root of {r}")
    num_root, den_root = math.isqrt(r.numerator), math.isqrt(r.denominator)
    if num_root * num_root == r.numerator and den_root * den_root == r.denominator:
        return AlgebraicNumber.from_rational(Fraction(num_root, den_root), var)
    u = MultiPoly.variable(var)
    defpoly = canonical(u * u - r)
    return AlgebraicNumber(defpoly, IsolInterval(Fraction(0), r + 1))
