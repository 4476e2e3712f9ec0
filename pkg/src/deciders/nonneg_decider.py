"""
Nonnegativity Decider
=====================
Decides whether a polynomial with rational coefficients is nonnegative at
every real point.

Responsibilities:
- Open-cell decomposition: project, isolate, sample open cells, lift
- Numeric screen and homogeneous reduction before the decomposition
- endpoint_test and monotonicity_class on top of the decision

The failure set {p < 0} is open, so it meets some open cell of the
decomposition built from p; sampling open cells only (rational samples)
is therefore complete for finding a failure.
"""

import itertools
import logging
import operator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from src.algebra.polyring import (
    MultiPoly,
    Scalar,
    coprime_basis,
    derivative,
    eval_at,
    is_homogeneous_in,
    squarefree_part,
    substitute,
)
from src.algebra.projection import decider_projection
from src.algebra.realroots import isolate_real_roots, sample_between
from src.deciders.base_decider import BaseDecider, DecisionStats, Verdict
from src.deciders.falsifier import Falsifier, ScreenConfig, polynomial_evaluator, shrink_witness
from src.errors import ProjectionCollapseError, UsageError

logger = logging.getLogger(__name__)


@dataclass
class DeciderConfig:
    """Knobs shared by the deciders."""
    screen: ScreenConfig = field(default_factory=ScreenConfig)
    shrink_witness: bool = True
    homogeneous_reduction: bool = True


# ============================================================================
# OPEN-CELL DECOMPOSITION
# ============================================================================

def _specialize(q: MultiPoly, point: Dict[str, Fraction]) -> MultiPoly:
    for var, value in point.items():
        if var in q.used_variables():
            q = substitute(q, var, value)
    return q


def open_cell_points(polys: Sequence[MultiPoly], variables: Sequence[str],
                     stats: Optional[DecisionStats] = None) -> Iterator[Dict[str, Fraction]]:
    """
    Yield one rational point per open cell of the decomposition induced by
    ``polys`` over ``variables`` (last variable eliminated first), in
    lexicographic sample order.

    Raises:
        ProjectionCollapseError: a projection set could not be formed
    """
    variables = list(variables)
    n = len(variables)
    if n == 0:
        yield {}
        return

    levels: List[List[MultiPoly]] = [[] for _ in range(n)]
    current = [squarefree_part(p) for p in polys if not p.is_zero() and not p.is_constant()]
    for i in range(n - 1, 0, -1):
        levels[i] = coprime_basis(current)
        current = decider_projection(levels[i], variables[i], variables[:i])
    levels[0] = coprime_basis(current)
    if stats is not None:
        stats.levels = [len(level) for level in levels]
    logger.debug(f"Projection level sizes over {variables}: {[len(level) for level in levels]}")

    yield from _lift(levels, variables, 0, {}, stats)


def _lift(levels: List[List[MultiPoly]], variables: List[str], i: int,
          point: Dict[str, Fraction], stats: Optional[DecisionStats]) -> Iterator[Dict[str, Fraction]]:
    if i == len(variables):
        if stats is not None:
            stats.cells_visited += 1
        yield dict(point)
        return

    specialized = []
    for q in levels[i]:
        s = _specialize(q, point)
        if s.is_zero():
            logger.warning(f"Projection polynomial vanishes over sample {point}; skipped")
            continue
        if not s.is_constant():
            specialized.append(s)

    if specialized:
        product = squarefree_part(reduce(operator.mul, specialized))
        samples = sample_between(isolate_real_roots(product))
    else:
        samples = [Fraction(0)]

    var = variables[i]
    for s in samples:
        point[var] = s
        yield from _lift(levels, variables, i + 1, point, stats)
    point.pop(var, None)


# ============================================================================
# DECIDER
# ============================================================================

class NonnegDecider(BaseDecider):
    """
    Universal nonnegativity over the reals by open-cell sampling.

    A numeric screen runs first; homogeneous inputs are reduced by one
    variable; the decomposition is the complete fallback.
    """

    def __init__(self, config: Optional[DeciderConfig] = None):
        self.config = config or DeciderConfig()
        self.falsifier = Falsifier(self.config.screen)
        self.last_stats = DecisionStats()

    def get_name(self) -> str:
        return "nonneg"

    def decide(self, p: MultiPoly, variables: Sequence[str]) -> Verdict:
        variables = list(variables)
        missing = [v for v in p.used_variables() if v not in variables]
        if missing:
            raise UsageError(f"variables {missing} are not quantified")

        self.last_stats = DecisionStats()
        verdict = self._decide(p, [v for v in variables if v in p.used_variables()])
        if not verdict.failed:
            return verdict

        witness = {v: verdict.witness.get(v, Fraction(0)) for v in variables}
        if self.config.shrink_witness:
            witness = shrink_witness(witness, variables, lambda pt: eval_at(p, pt) < 0)
        return Verdict.fails(witness)

    def _decide(self, p: MultiPoly, variables: List[str]) -> Verdict:
        if p.is_constant():
            if p.constant_value() >= 0:
                return Verdict.holds_for_all()
            return Verdict.fails({})

        found = self.falsifier.search(
            polynomial_evaluator(p, variables), len(variables),
            lambda pt: eval_at(p, dict(zip(variables, pt))) < 0)
        if found is not None:
            self.last_stats.screened = True
            return Verdict.fails(dict(zip(variables, found)))

        if self.config.homogeneous_reduction and len(variables) >= 2 \
                and is_homogeneous_in(p, variables):
            return self._decide_form(p, variables)

        try:
            for point in open_cell_points([p], variables, self.last_stats):
                if eval_at(p, point) < 0:
                    logger.debug(f"Negative sample after {self.last_stats.cells_visited} cells")
                    return Verdict.fails(point)
        except ProjectionCollapseError as e:
            logger.warning(f"Projection collapsed: {e}")
            return Verdict.undecided(f"projection degenerate ({e})")
        logger.debug(f"Nonnegative on all {self.last_stats.cells_visited} open cells")
        return Verdict.holds_for_all()

    def _decide_form(self, p: MultiPoly, variables: List[str]) -> Verdict:
        """Forms of odd degree always fail; even forms are decided at last variable = 1."""
        degree = p.total_degree()
        if degree % 2 == 1:
            return Verdict.fails(_odd_form_witness(p, variables))
        last = variables[-1]
        reduced = substitute(p, last, 1)
        rest = [v for v in variables[:-1] if v in reduced.used_variables()]
        verdict = self._decide(reduced, rest)
        if verdict.failed:
            witness = dict(verdict.witness)
            witness[last] = Fraction(1)
            return Verdict.fails(witness)
        return verdict


def _odd_form_witness(p: MultiPoly, variables: List[str]) -> Dict[str, Fraction]:
    """A point where an odd-degree form is negative: find p != 0, flip if positive."""
    bound = int(p.total_degree()) + 1
    for values in itertools.product(range(1, bound + 1), repeat=len(variables)):
        point = dict(zip(variables, map(Fraction, values)))
        value = eval_at(p, point)
        if value < 0:
            return point
        if value > 0:
            return {v: -c for v, c in point.items()}
    raise UsageError("a nonzero form vanished on a full grid")


# ============================================================================
# PUBLIC OPERATIONS
# ============================================================================

class MonotonicityClass(Enum):
    DECREASING = "decreasing"
    INCREASING = "increasing"
    INDEFINITE = "indefinite"


def nonneg_forall(p: MultiPoly, variables: Sequence[str],
                  config: Optional[DeciderConfig] = None) -> Verdict:
    """HoldsForAll iff p(x) >= 0 for every real x."""
    return NonnegDecider(config).decide(p, variables)


def endpoint_test(F: MultiPoly, param: str, value: Scalar, variables: Sequence[str],
                  decider: Optional[BaseDecider] = None) -> Verdict:
    """Decide F(value, x) >= 0 for all x."""
    decider = decider or NonnegDecider()
    g = substitute(F, param, value) if param in F.variables else F
    return decider.decide(g, variables)


def monotonicity_class(F: MultiPoly, param: str, variables: Optional[Sequence[str]] = None,
                       decider: Optional[BaseDecider] = None) -> Tuple[MonotonicityClass, List[str]]:
    """
    Classify F as decreasing, increasing or neither in ``param``, uniformly
    over all real x and all parameter values. The derivative in ``param``
    is decided with the parameter quantified alongside x.

    Returns:
        (class, caveats); an undecided inner decision yields INDEFINITE with a caveat
    """
    if param not in F.used_variables():
        raise UsageError(f"the polynomial does not depend on {param!r}")
    if variables is None:
        variables = [v for v in F.used_variables() if v != param]
    decider = decider or NonnegDecider()
    d = derivative(F, param)
    quantified = list(variables)
    if param in d.used_variables() and param not in quantified:
        quantified.append(param)

    caveats = []
    decreasing = decider.decide(-d, quantified)
    if decreasing.holds:
        return MonotonicityClass.DECREASING, caveats
    if decreasing.is_undecided:
        caveats.append(f"monotonicity (decreasing) undecided: {decreasing.reason}")

    increasing = decider.decide(d, quantified)
    if increasing.holds:
        return MonotonicityClass.INCREASING, caveats
    if increasing.is_undecided:
        caveats.append(f"monotonicity (increasing) undecided: {increasing.reason}")
    return MonotonicityClass.INDEFINITE, caveats
