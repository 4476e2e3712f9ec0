"""
Polynomial Ring Module
======================
Exact arithmetic over Q and sparse multivariate polynomials.

Responsibilities:
- MultiPoly value type (ordered variables + exponent-vector term map)
- Arithmetic, derivatives, substitution, exact evaluation
- gcd, squarefree part, primitive part and the powerfree filter
- Resultants by subresultant PRS on integer-primitive inputs

Heavy lifting (products, gcd, PRS) is delegated to sympy's ``Poly`` over
``ZZ``/``QQ``. Everything exposed here is immutable; rational coefficients
are ``fractions.Fraction``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import sympy
from sympy import Poly, Symbol
from sympy.polys.domains import QQ, ZZ
from sympy.polys.polyerrors import ExactQuotientFailed

from src.errors import DegenerateProjectionError, UsageError

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Scalar = Union[int, Fraction]

# Degree of the zero polynomial.
MINUS_INFINITY = float('-inf')


# ============================================================================
# SCALAR CONVERSIONS
# ============================================================================

def to_fraction(value) -> Fraction:
    """
    Convert any exact rational (int, Fraction, sympy Rational, gmpy mpq/mpz,
    sympy domain element) to a Fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    try:
        return Fraction(int(value.numerator), int(value.denominator))
    except AttributeError:
        raise UsageError(f"not an exact rational: {value!r}")


def _qq(value: Fraction):
    return QQ(value.numerator, value.denominator)


def _sym_rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


# ============================================================================
# MULTIPOLY
# ============================================================================

@dataclass(frozen=True, eq=False)
class MultiPoly:
    """
    Sparse multivariate polynomial with exact rational coefficients.

    ``variables`` is the ordered variable universe; ``terms`` maps exponent
    vectors (one entry per variable) to nonzero Fractions. The zero
    polynomial is the empty map. Equality is mathematical: universes are
    aligned before comparing, so ``x`` over (x,) equals ``x`` over (x, y).
    """

    variables: Tuple[str, ...] = ()
    terms: Dict[Monomial, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        variables = tuple(self.variables)
        if len(set(variables)) != len(variables):
            raise UsageError(f"duplicate variables in {variables}")
        clean: Dict[Monomial, Fraction] = {}
        for monom, coeff in self.terms.items():
            monom = tuple(int(e) for e in monom)
            if len(monom) != len(variables):
                raise UsageError(
                    f"exponent vector {monom} does not match variables {variables}")
            if any(e < 0 for e in monom):
                raise UsageError(f"negative exponent in {monom}")
            c = to_fraction(coeff)
            if c:
                clean[monom] = clean.get(monom, Fraction(0)) + c
                if not clean[monom]:
                    del clean[monom]
        object.__setattr__(self, 'variables', variables)
        object.__setattr__(self, 'terms', clean)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str] = ()) -> "MultiPoly":
        return cls(tuple(variables), {})

    @classmethod
    def constant(cls, value: Scalar, variables: Sequence[str] = ()) -> "MultiPoly":
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): to_fraction(value)})

    @classmethod
    def variable(cls, name: str, variables: Optional[Sequence[str]] = None) -> "MultiPoly":
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            variables = variables + (name,)
        monom = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {monom: Fraction(1)})

    @classmethod
    def from_poly(cls, poly: Poly) -> "MultiPoly":
        """Build from a sympy Poly over ZZ or QQ."""
        if not (poly.domain.is_ZZ or poly.domain.is_QQ):
            poly = poly.set_domain(QQ)
        variables = tuple(str(g) for g in poly.gens)
        terms = {monom: to_fraction(c) for monom, c in poly.as_dict(native=True).items()}
        return cls(variables, terms)

    @classmethod
    def from_expr(cls, expr, variables: Optional[Sequence[str]] = None) -> "MultiPoly":
        """
        Build from a sympy expression (or a string sympy can parse).

        Variables default to the sorted names of the free symbols.
        """
        if isinstance(expr, str):
            expr = sympy.sympify(expr)
        expr = sympy.sympify(expr)
        if variables is None:
            variables = sorted(str(s) for s in expr.free_symbols)
        variables = tuple(variables)
        if not variables:
            return cls.constant(to_fraction(sympy.Rational(expr)))
        return cls.from_poly(Poly(expr, *[Symbol(v) for v in variables], domain=QQ))

    # ------------------------------------------------------------------
    # Structure
    # ------------------------------------------------------------------

    @property
    def symbols(self) -> Tuple[Symbol, ...]:
        return tuple(Symbol(v) for v in self.variables)

    @cached_property
    def _poly(self) -> Poly:
        if not self.variables:
            raise UsageError("a polynomial without variables has no sympy Poly form")
        rep = {monom: _qq(c) for monom, c in self.terms.items()}
        return Poly.from_dict(rep, *self.symbols, domain=QQ)

    def to_poly(self) -> Poly:
        """sympy Poly over QQ with gens = variables."""
        return self._poly

    @cached_property
    def _key(self) -> frozenset:
        items = []
        for monom, c in self.terms.items():
            support = tuple(sorted((v, e) for v, e in zip(self.variables, monom) if e))
            items.append((support, c))
        return frozenset(items)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(monom) for monom in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise UsageError(f"{self.render()} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.variables), Fraction(0))

    def used_variables(self) -> Tuple[str, ...]:
        """Variables with a positive exponent somewhere, in universe order."""
        used = [False] * len(self.variables)
        for monom in self.terms:
            for i, e in enumerate(monom):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self.variables, used) if u)

    def degree(self, var: str) -> Union[int, float]:
        if self.is_zero():
            return MINUS_INFINITY
        if var not in self.variables:
            return 0
        i = self.variables.index(var)
        return max(monom[i] for monom in self.terms)

    def total_degree(self) -> Union[int, float]:
        if self.is_zero():
            return MINUS_INFINITY
        return max(sum(monom) for monom in self.terms)

    def with_variables(self, variables: Sequence[str]) -> "MultiPoly":
        """Re-express over another universe containing every used variable."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        missing = [v for v in self.used_variables() if v not in variables]
        if missing:
            raise UsageError(f"universe {variables} lacks used variables {missing}")
        position = {v: i for i, v in enumerate(variables)}
        terms = {}
        for monom, c in self.terms.items():
            new = [0] * len(variables)
            for v, e in zip(self.variables, monom):
                if e:
                    new[position[v]] = e
            terms[tuple(new)] = c
        return MultiPoly(variables, terms)

    def trim(self) -> "MultiPoly":
        """Drop variables that do not occur."""
        return self.with_variables(self.used_variables())

    def scale(self, factor: Scalar) -> "MultiPoly":
        factor = to_fraction(factor)
        return MultiPoly(self.variables, {m: c * factor for m, c in self.terms.items()})

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _coerce(self, other) -> Optional["MultiPoly"]:
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(other, self.variables)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = unify(self, other)
        terms = dict(a.terms)
        for monom, c in b.terms.items():
            terms[monom] = terms.get(monom, Fraction(0)) + c
        return MultiPoly(a.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        if other.is_constant():
            return unify(self, other)[0].scale(other.constant_value())
        if self.is_constant():
            return unify(other, self)[0].scale(self.constant_value())
        a, b = unify(self, other)
        return MultiPoly.from_poly(a.to_poly() * b.to_poly())

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise UsageError(f"exponent must be a nonnegative integer, got {exponent!r}")
        if self.is_constant():
            return MultiPoly.constant(self.constant_value() ** exponent, self.variables)
        return MultiPoly.from_poly(self.to_poly() ** exponent)

    # ------------------------------------------------------------------
    # Rendering
    # ------------------------------------------------------------------

    def render(self) -> str:
        """
        Canonical text: descending lex order of exponent vectors, ``^`` for
        powers, explicit ``*``, rationals as ``p/q``.
        """
        if self.is_zero():
            return "0"
        pieces = []
        for monom in sorted(self.terms, reverse=True):
            c = self.terms[monom]
            factors = []
            for v, e in zip(self.variables, monom):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            magnitude = abs(c)
            text = _render_rational(magnitude)
            if factors:
                body = "*".join(factors)
                text = body if magnitude == 1 else f"{text}*{body}"
            if not pieces:
                pieces.append(f"-{text}" if c < 0 else text)
            else:
                pieces.append(f"- {text}" if c < 0 else f"+ {text}")
        return " ".join(pieces)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"MultiPoly({self.render()!r}, variables={self.variables})"


def _render_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def unify(a: MultiPoly, b: MultiPoly) -> Tuple[MultiPoly, MultiPoly]:
    """Extend both operands to the union universe (a's order, then b's new names)."""
    if a.variables == b.variables:
        return a, b
    variables = a.variables + tuple(v for v in b.variables if v not in a.variables)
    return a.with_variables(variables), b.with_variables(variables)


# ============================================================================
# UNIVARIATE VIEW
# ============================================================================

@dataclass(frozen=True)
class UniView:
    """p written as sum(coeffs[i] * main_var**i), coefficients free of main_var."""

    poly: MultiPoly
    main_var: str
    coeffs: Tuple[MultiPoly, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> MultiPoly:
        return self.coeffs[-1]

    def reassemble(self) -> MultiPoly:
        v = MultiPoly.variable(self.main_var, self.poly.variables)
        total = MultiPoly.zero(self.poly.variables)
        for i, c in enumerate(self.coeffs):
            total = total + c * (v ** i)
        return total


def univariate_view(p: MultiPoly, var: str) -> UniView:
    """Dense coefficient list of p in ``var``; coefficients live in the other variables."""
    if p.is_zero():
        raise UsageError("the zero polynomial has no univariate view")
    rest = tuple(v for v in p.variables if v != var)
    if var not in p.variables:
        return UniView(p, var, (p.with_variables(rest),))
    i = p.variables.index(var)
    buckets: Dict[int, Dict[Monomial, Fraction]] = {}
    for monom, c in p.terms.items():
        buckets.setdefault(monom[i], {})[monom[:i] + monom[i + 1:]] = c
    degree = max(buckets)
    coeffs = tuple(MultiPoly(rest, buckets.get(d, {})) for d in range(degree + 1))
    return UniView(p, var, coeffs)


# ============================================================================
# OPERATIONS
# ============================================================================

def poly_arith(a: MultiPoly, b: Optional[MultiPoly], op: str,
               exponent: Optional[int] = None) -> MultiPoly:
    """
    Exact ring operation: op is 'add', 'sub', 'mul' or 'pow' (a ** exponent).
    """
    if op == 'add':
        return a + b
    if op == 'sub':
        return a - b
    if op == 'mul':
        return a * b
    if op == 'pow':
        if exponent is None:
            raise UsageError("pow needs an exponent")
        return a ** exponent
    raise UsageError(f"unknown operation {op!r}")


def derivative(p: MultiPoly, var: str) -> MultiPoly:
    """Formal partial derivative with respect to ``var``."""
    if var not in p.variables:
        raise UsageError(f"variable {var!r} not in {p.variables}")
    i = p.variables.index(var)
    terms: Dict[Monomial, Fraction] = {}
    for monom, c in p.terms.items():
        e = monom[i]
        if e:
            terms[monom[:i] + (e - 1,) + monom[i + 1:]] = c * e
    return MultiPoly(p.variables, terms)


def substitute(p: MultiPoly, var: str,
               replacement: Union[MultiPoly, Scalar]) -> MultiPoly:
    """
    Replace ``var`` by a rational (eliminating it from the universe) or by a
    polynomial.
    """
    if var not in p.variables:
        raise UsageError(f"variable {var!r} not in {p.variables}")
    rest = tuple(v for v in p.variables if v != var)

    if not isinstance(replacement, MultiPoly):
        value = to_fraction(replacement)
        if p.degree(var) <= 0:
            return p.with_variables(rest)
        if rest:
            poly = p.to_poly().eval(Symbol(var), _qq(value))
            return MultiPoly.from_poly(poly).with_variables(rest)
        return MultiPoly.constant(eval_at(p, {var: value}))

    if replacement == MultiPoly.variable(var):
        return p
    view = univariate_view(p, var)
    total = MultiPoly.zero(rest)
    power = MultiPoly.constant(1)
    for i, coeff in enumerate(view.coeffs):
        if i:
            power = power * replacement
        if not coeff.is_zero():
            total = total + coeff * power
    return total


def eval_at(p: MultiPoly, point: Mapping[str, Scalar]) -> Fraction:
    """Exact value of p at a rational point covering its used variables."""
    missing = [v for v in p.used_variables() if v not in point]
    if missing:
        raise UsageError(f"no value assigned to {missing}")
    values = [to_fraction(point[v]) if v in point else Fraction(0) for v in p.variables]
    powers: Dict[Tuple[int, int], Fraction] = {}
    total = Fraction(0)
    for monom, c in p.terms.items():
        term = c
        for i, e in enumerate(monom):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = values[i] ** e
                term *= powers[key]
        total += term
    return total


def canonical(p: MultiPoly) -> MultiPoly:
    """
    The representative of p up to a nonzero rational constant: integer
    coefficients with content 1 and positive leading coefficient under lex
    order of exponent vectors.
    """
    if p.is_zero():
        return p
    denominators = reduce(math.lcm, (c.denominator for c in p.terms.values()), 1)
    numerators = [int(c * denominators) for c in p.terms.values()]
    content = reduce(math.gcd, numerators, 0)
    leading = p.terms[max(p.terms)]
    sign = -1 if leading < 0 else 1
    factor = Fraction(sign * denominators, content)
    return p.scale(factor)


def equal_up_to_constant(a: MultiPoly, b: MultiPoly) -> bool:
    """a ≐ b."""
    return canonical(a) == canonical(b)


def _int_poly(p: MultiPoly, gens: Sequence[Symbol]) -> Poly:
    """Integer-primitive sympy Poly over ZZ with the given generator order."""
    c = canonical(p)
    names = [str(g) for g in gens]
    c = c.with_variables(names)
    rep = {monom: ZZ(int(coeff)) for monom, coeff in c.terms.items()}
    return Poly.from_dict(rep, *gens, domain=ZZ)


def exact_divide(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Exact quotient a / b; UsageError when b does not divide a."""
    if b.is_zero():
        raise UsageError("division by the zero polynomial")
    if b.is_constant():
        return a.scale(1 / b.constant_value())
    a2, b2 = unify(a, b)
    try:
        q = a2.to_poly().exquo(b2.to_poly())
    except ExactQuotientFailed:
        raise UsageError(f"{b.render()} does not divide {a.render()}")
    return MultiPoly.from_poly(q)


def multivar_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """
    Greatest common divisor, normalized integer-primitive with positive
    leading coefficient. gcd(0, 0) = 0.
    """
    a, b = unify(a, b)
    if a.is_zero() and b.is_zero():
        return a
    if a.is_zero():
        return canonical(b)
    if b.is_zero():
        return canonical(a)
    if a.is_constant() or b.is_constant():
        return MultiPoly.constant(1, a.variables)
    gens = a.symbols
    g = _int_poly(a, gens).gcd(_int_poly(b, gens))
    return canonical(MultiPoly.from_poly(g))


def squarefree_part(p: MultiPoly) -> MultiPoly:
    """p / gcd(p, dp/dv1, ..., dp/dvn), canonical."""
    if p.is_zero():
        raise UsageError("squarefree part of the zero polynomial")
    if p.is_constant():
        return MultiPoly.constant(1, p.variables)
    poly = _int_poly(p, p.symbols)
    return canonical(MultiPoly.from_poly(poly.sqf_part()))


def primitive_part_wrt(p: MultiPoly, vset: Iterable[str]) -> MultiPoly:
    """
    Divide p by the gcd of its coefficients when p is read as a polynomial in
    the ``vset`` variables (coefficients in the remaining variables).
    """
    if p.is_zero():
        raise UsageError("primitive part of the zero polynomial")
    vset = set(vset)
    inside = [i for i, v in enumerate(p.variables) if v in vset]
    outside = [i for i, v in enumerate(p.variables) if v not in vset]
    rest = tuple(p.variables[i] for i in outside)
    buckets: Dict[Monomial, Dict[Monomial, Fraction]] = {}
    for monom, c in p.terms.items():
        key = tuple(monom[i] for i in inside)
        buckets.setdefault(key, {})[tuple(monom[i] for i in outside)] = c

    content: Optional[MultiPoly] = None
    for key in sorted(buckets):
        coeff = MultiPoly(rest, buckets[key])
        content = canonical(coeff) if content is None else multivar_gcd(content, coeff)
        if content.is_constant():
            break
    if content.is_constant():
        return canonical(p)
    return canonical(exact_divide(p, content))


def powerfree(p: MultiPoly, vset: Iterable[str]) -> MultiPoly:
    """
    Distinct factors of p that involve at least one ``vset`` variable, each
    to the first power (up to a rational constant).
    """
    vset = tuple(vset)
    pp = primitive_part_wrt(p, vset)
    if pp.is_constant():
        raise DegenerateProjectionError(
            f"no factor of {p.render()[:80]} depends on {sorted(vset)}")
    return squarefree_part(pp)


def resultant(a: MultiPoly, b: MultiPoly, var: str) -> MultiPoly:
    """
    Resultant eliminating ``var``, by subresultant PRS on the
    integer-primitive forms of a and b. The result lives in the remaining
    variables.
    """
    if a.is_zero() or b.is_zero():
        raise UsageError("resultant with the zero polynomial")
    a, b = unify(a, b)
    if var not in a.variables:
        raise UsageError(f"variable {var!r} not in {a.variables}")
    da, db = a.degree(var), b.degree(var)
    rest = tuple(v for v in a.variables if v != var)
    if da == 0 and db == 0:
        raise UsageError(f"both polynomials are constant in {var!r}")

    a, b = canonical(a), canonical(b)
    if da == 0:
        return (a.with_variables(a.variables) ** db).with_variables(rest)
    if db == 0:
        return (b ** da).with_variables(rest)

    gens = (Symbol(var),) + tuple(Symbol(v) for v in rest)
    r = _int_poly(a, gens).resultant(_int_poly(b, gens))
    if isinstance(r, Poly):
        return MultiPoly.from_poly(r).with_variables(rest)
    return MultiPoly.constant(to_fraction(r), rest)


def leading_coeff_and_degree(p: MultiPoly, var: str) -> Tuple[MultiPoly, Union[int, float]]:
    """Leading coefficient and degree of p in ``var``; the zero polynomial has degree -inf."""
    if p.is_zero():
        return p, MINUS_INFINITY
    view = univariate_view(p, var)
    return view.leading, view.degree


# ============================================================================
# STRUCTURAL HELPERS
# ============================================================================

def is_even_in(p: MultiPoly, var: str) -> bool:
    """True when only even powers of ``var`` occur."""
    if var not in p.variables:
        return True
    i = p.variables.index(var)
    return all(monom[i] % 2 == 0 for monom in p.terms)


def is_homogeneous_in(p: MultiPoly, variables: Sequence[str]) -> bool:
    """True when every term has the same total degree in ``variables``."""
    if p.is_zero():
        return True
    idx = [p.variables.index(v) for v in variables if v in p.variables]
    degrees = {sum(monom[i] for i in idx) for monom in p.terms}
    return len(degrees) == 1


def deflate_even(p: MultiPoly, var: str) -> MultiPoly:
    """For p even in ``var``, the polynomial P with p = P(var^2) (same variable name)."""
    if not is_even_in(p, var):
        raise UsageError(f"{var!r} occurs with odd exponent")
    if var not in p.variables:
        return p
    i = p.variables.index(var)
    terms = {monom[:i] + (monom[i] // 2,) + monom[i + 1:]: c for monom, c in p.terms.items()}
    return MultiPoly(p.variables, terms)


def coprime_basis(polys: Iterable[MultiPoly]) -> List[MultiPoly]:
    """
    Split nonconstant inputs into pairwise coprime, squarefree, canonical
    factors with the same combined zero set. Output order is deterministic.
    """
    basis: List[MultiPoly] = []

    def insert(q: MultiPoly):
        if q.is_constant():
            return
        for i, b in enumerate(basis):
            g = multivar_gcd(b, q)
            if not g.is_constant():
                basis.pop(i)
                for piece in (g, exact_divide(b, g), exact_divide(q, g)):
                    insert(canonical(piece))
                return
        basis.append(q)

    for p in polys:
        if p.is_zero() or p.is_constant():
            continue
        insert(squarefree_part(p))

    basis = list(dict.fromkeys(basis))
    basis.sort(key=lambda q: (q.total_degree(), q.render()))
    return basis
