"""
Problem Parser
==============
Reads problem files and polynomial expressions into exact objects.

File grammar (one entry per line, ``#`` starts a comment):

    direction: max | min
    parameter: k
    objective: a^3 + b^3 + c^3 + k*(a^2*b + b^2*c + c^2*a) - (k+1)*(a*b^2 + b*c^2 + c*a^2)
    vars: a:nonneg, b:nonneg, c:nonneg

Expressions: integers, identifiers, + - * / ^, parentheses and sqrt(...).
Precedence is ^ over unary minus over * and / over binary + and -.
Multiplication is always explicit, ``/`` only divides by nonzero
constants, exponents are integer literals and decimals are rejected.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.algebra.polyring import MultiPoly
from src.deciders.base_decider import SectionSpec
from src.engines.optimizer_engine import Direction, Domain, ProblemSpec
from src.errors import ProblemParseError, UsageError

logger = logging.getLogger(__name__)

TOKEN_RE = re.compile(r"\s*(?:(?P<number>\d+(?:\.\d*)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),])|(?P<bad>\S))")
KEYS = ('direction', 'parameter', 'objective', 'vars')
RESERVED = {'sqrt'}


@dataclass(frozen=True)
class Token:
    kind: str      # 'number', 'ident', 'op' or 'end'
    text: str
    column: int    # 1-based


def tokenize(text: str, line: int = 1, offset: int = 0) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = TOKEN_RE.match(text, pos)
        if match is None:
            break
        kind = match.lastgroup
        start = match.start(kind)
        value = match.group(kind)
        column = offset + start + 1
        if kind == 'bad':
            raise ProblemParseError(f"unexpected character {value!r}", line, column)
        if kind == 'number' and '.' in value:
            raise ProblemParseError(f"decimal literal {value!r} not allowed; write p/q", line, column)
        tokens.append(Token(kind, value, column))
        pos = match.end()
    tokens.append(Token('end', '', offset + len(text.rstrip()) + 1))
    return tokens


class ExpressionParser:
    """
    Recursive-descent parser producing MultiPoly values over a fixed universe.

    sqrt(...) terms become fresh aux variables u, u1, u2, ...; equal
    radicands share one aux variable.
    """

    def __init__(self, variables: Sequence[str], param: Optional[str] = None,
                 allow_sqrt: bool = True, line: int = 1):
        self.variables = list(variables)
        self.param = param
        self.allow_sqrt = allow_sqrt
        self.line = line
        self.sections: List[SectionSpec] = []
        self._aux_names: List[str] = []
        self.tokens: List[Token] = []
        self.pos = 0
        self._in_sqrt = False

    @property
    def universe(self) -> Tuple[str, ...]:
        names = ([self.param] if self.param else []) + self.variables
        return tuple(names) + tuple(self._aux_names)

    def parse(self, text: str, offset: int = 0) -> MultiPoly:
        self.tokens = tokenize(text, self.line, offset)
        self.pos = 0
        if self._peek().kind == 'end':
            raise self._error("empty expression")
        result = self._expr()
        token = self._peek()
        if token.kind != 'end':
            if token.kind in ('number', 'ident') or token.text == '(':
                raise self._error(f"missing operator before {token.text!r} "
                                  "(implicit multiplication is not allowed)")
            raise self._error(f"unexpected {token.text!r}")
        return result.with_variables(self.universe)

    # ------------------------------------------------------------------
    # Token helpers
    # ------------------------------------------------------------------

    def _peek(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _error(self, message: str, token: Optional[Token] = None) -> ProblemParseError:
        token = token or self._peek()
        return ProblemParseError(message, self.line, token.column)

    def _expect(self, text: str) -> Token:
        token = self._peek()
        if token.text != text:
            found = 'end of line' if token.kind == 'end' else repr(token.text)
            raise self._error(f"expected {text!r}, found {found}")
        return self._advance()

    # ------------------------------------------------------------------
    # Grammar
    # ------------------------------------------------------------------

    def _expr(self) -> MultiPoly:
        result = self._term()
        while self._peek().text in ('+', '-'):
            op = self._advance().text
            right = self._term()
            result = result + right if op == '+' else result - right
        return result

    def _term(self) -> MultiPoly:
        result = self._unary()
        while self._peek().text in ('*', '/'):
            op_token = self._advance()
            right = self._unary()
            if op_token.text == '*':
                result = result * right
            else:
                if not right.is_constant():
                    raise self._error("division by a non-constant expression", op_token)
                if right.constant_value() == 0:
                    raise self._error("division by zero", op_token)
                result = result.scale(1 / right.constant_value())
        return result

    def _unary(self) -> MultiPoly:
        token = self._peek()
        if token.text == '-':
            self._advance()
            return -self._unary()
        if token.text == '+':
            self._advance()
            return self._unary()
        return self._power()

    def _power(self) -> MultiPoly:
        base = self._atom()
        if self._peek().text == '^':
            caret = self._advance()
            token = self._peek()
            if token.kind != 'number':
                found = 'end of line' if token.kind == 'end' else repr(token.text)
                raise self._error(f"exponent must be a nonnegative integer literal, found {found}",
                                  caret)
            self._advance()
            base = base ** int(token.text)
            if self._peek().text == '^':
                raise self._error("chained exponents need parentheses")
        return base

    def _atom(self) -> MultiPoly:
        token = self._peek()
        if token.kind == 'number':
            self._advance()
            return MultiPoly.constant(int(token.text), self.universe)
        if token.kind == 'ident':
            self._advance()
            if token.text == 'sqrt':
                return self._sqrt(token)
            if token.text not in self.universe:
                raise self._error(f"unknown variable {token.text!r}", token)
            return MultiPoly.variable(token.text, self.universe)
        if token.text == '(':
            self._advance()
            inner = self._expr()
            self._expect(')')
            return inner
        found = 'end of line' if token.kind == 'end' else repr(token.text)
        raise self._error(f"expected a number, variable or '(', found {found}")

    def _sqrt(self, token: Token) -> MultiPoly:
        if not self.allow_sqrt:
            raise self._error("sqrt is not allowed here", token)
        if self._in_sqrt:
            raise self._error("nested sqrt is not supported", token)
        self._expect('(')
        self._in_sqrt = True
        try:
            radicand = self._expr()
        finally:
            self._in_sqrt = False
        self._expect(')')
        if self.param and self.param in radicand.used_variables():
            raise self._error(f"the parameter {self.param!r} may not appear under sqrt", token)
        radicand = radicand.trim()

        for section in self.sections:
            if section.radicand == radicand:
                return MultiPoly.variable(section.aux, self.universe)
        aux = self._fresh_aux()
        self._aux_names.append(aux)
        self.sections.append(SectionSpec(aux, radicand))
        logger.debug(f"sqrt({radicand.render()}) introduced as {aux}")
        return MultiPoly.variable(aux, self.universe)

    def _fresh_aux(self) -> str:
        taken = set(self.universe)
        if 'u' not in taken:
            return 'u'
        i = 1
        while f"u{i}" in taken:
            i += 1
        return f"u{i}"


# ============================================================================
# PUBLIC API
# ============================================================================

def parse_polynomial(text: str, variables: Optional[Sequence[str]] = None) -> MultiPoly:
    """
    Parse a polynomial expression without radicals.

    Args:
        text: Expression in the problem grammar
        variables: Allowed identifiers; defaults to every identifier in the text
    """
    if variables is None:
        names = re.findall(r"[A-Za-z_][A-Za-z0-9_]*", text)
        variables = list(dict.fromkeys(n for n in names if n not in RESERVED))
    parser = ExpressionParser(variables, allow_sqrt=False)
    return parser.parse(text).trim()


def _split_lines(text: str) -> Dict[str, Tuple[str, int, int]]:
    entries: Dict[str, Tuple[str, int, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0]
        if not line.strip():
            continue
        if ':' not in line:
            raise ProblemParseError("expected 'key: value'", number, len(line) - len(line.lstrip()) + 1)
        key, value = line.split(':', 1)
        key_name = key.strip().lower()
        if key_name not in KEYS:
            raise ProblemParseError(f"unknown key {key.strip()!r}", number, len(key) - len(key.lstrip()) + 1)
        if key_name in entries:
            raise ProblemParseError(f"duplicate key {key_name!r}", number, 1)
        entries[key_name] = (value, number, len(key) + 1)
    return entries


def _parse_vars(value: str, line: int, offset: int, param: str) -> Dict[str, Domain]:
    domains: Dict[str, Domain] = {}
    column = offset
    for item in value.split(','):
        col = column + len(item) - len(item.lstrip()) + 1
        column += len(item) + 1
        if not item.strip():
            raise ProblemParseError("empty variable entry", line, col)
        if ':' not in item:
            raise ProblemParseError(f"expected name:domain, found {item.strip()!r}", line, col)
        name, domain = (part.strip() for part in item.split(':', 1))
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in RESERVED:
            raise ProblemParseError(f"invalid variable name {name!r}", line, col)
        if name == param:
            raise ProblemParseError(f"{name!r} is the parameter", line, col)
        if name in domains:
            raise ProblemParseError(f"variable {name!r} declared twice", line, col)
        try:
            domains[name] = Domain(domain.lower())
        except ValueError:
            raise ProblemParseError(f"unknown domain {domain!r} (use real or nonneg)", line, col)
    return domains


def parse_problem(text: str) -> ProblemSpec:
    """
    Parse a problem file into a ProblemSpec.

    Raises:
        ProblemParseError: syntax or semantic error, with line and column
    """
    entries = _split_lines(text)
    for key in ('parameter', 'objective', 'vars'):
        if key not in entries:
            raise ProblemParseError(f"missing '{key}:' line", 0, 0)

    direction = Direction.MAX
    if 'direction' in entries:
        value, line, offset = entries['direction']
        try:
            direction = Direction(value.strip().lower())
        except ValueError:
            raise ProblemParseError(f"direction must be max or min, found {value.strip()!r}",
                                    line, offset + len(value) - len(value.lstrip()) + 1)

    value, line, offset = entries['parameter']
    param = value.strip()
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", param) or param in RESERVED:
        raise ProblemParseError(f"invalid parameter name {param!r}", line, offset + 1)

    value, line, offset = entries['vars']
    domains = _parse_vars(value, line, offset, param)

    value, line, offset = entries['objective']
    parser = ExpressionParser(list(domains), param=param, line=line)
    objective = parser.parse(value, offset)

    try:
        spec = ProblemSpec(objective=objective, param=param, direction=direction,
                           var_domains=domains, sections=tuple(parser.sections))
    except UsageError as e:
        raise ProblemParseError(str(e), line, offset + 1)
    logger.info(f"Parsed problem: {direction.value} {param}, {len(objective.terms)} terms, "
                f"{len(parser.sections)} radical(s)")
    return spec
