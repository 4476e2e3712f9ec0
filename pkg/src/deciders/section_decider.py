"""
Section Decider
===============
Nonnegativity of g(x, u) on the radical section u = +sqrt(r(x)).

Zeros of G(x) = g(x, +sqrt(r(x))) lie on res_u(g, u^2 - r) = 0, so G has
constant sign on every open cell of the decomposition built from that
resultant and r. At a rational sample x0 the sign of G(x0) is the exact
sign of the univariate g(x0, u) at the algebraic number +sqrt(r(x0)).
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.algebra.polyring import MultiPoly, eval_at, resultant, substitute
from src.algebra.realroots import algnum_sign_at, positive_sqrt
from src.deciders.base_decider import BaseDecider, DecisionStats, SectionSpec, Verdict
from src.deciders.falsifier import Falsifier, polynomial_evaluator, shrink_witness
from src.deciders.nonneg_decider import DeciderConfig, NonnegDecider, open_cell_points
from src.errors import ProjectionCollapseError, UsageError

logger = logging.getLogger(__name__)


class SectionDecider(BaseDecider):
    """
    Decides g(x, +sqrt(r(x))) >= 0 for all real x. Polynomials free of the
    aux variable are handed to the plain decider.
    """

    def __init__(self, section: SectionSpec, config: Optional[DeciderConfig] = None,
                 base: Optional[NonnegDecider] = None):
        self.section = section
        self.config = config or DeciderConfig()
        self.base = base or NonnegDecider(self.config)
        self.falsifier = Falsifier(self.config.screen)
        self.last_stats = DecisionStats()
        self._radicand_verdict: Optional[Verdict] = None

    def get_name(self) -> str:
        return f"section({self.section.aux})"

    def check_radicand(self) -> Verdict:
        """Verify r >= 0 everywhere (cached)."""
        if self._radicand_verdict is None:
            r = self.section.radicand
            verdict = self.base.decide(r, list(r.used_variables()))
            if verdict.failed:
                raise UsageError(
                    f"radicand {r.render()} is negative at {verdict.witness}")
            self._radicand_verdict = verdict
        return self._radicand_verdict

    def section_sign(self, g: MultiPoly, point: Dict[str, Fraction]) -> int:
        """Exact sign of g(x0, +sqrt(r(x0))) at a rational point x0."""
        aux = self.section.aux
        r0 = eval_at(self.section.radicand, point)
        if r0 < 0:
            raise UsageError(f"radicand negative at {point}")
        q = g
        for var, value in point.items():
            if var in q.used_variables():
                q = substitute(q, var, value)
        root = positive_sqrt(r0, aux)
        return algnum_sign_at(root, q)

    def decide(self, g: MultiPoly, variables: Sequence[str]) -> Verdict:
        aux = self.section.aux
        r = self.section.radicand
        base_vars = [v for v in variables if v != aux]
        missing = [v for v in g.used_variables() + r.used_variables()
                   if v != aux and v not in base_vars]
        if missing:
            raise UsageError(f"variables {sorted(set(missing))} are not quantified")

        radicand = self.check_radicand()
        if radicand.is_undecided:
            return Verdict.undecided(f"radicand nonnegativity undecided: {radicand.reason}")
        if aux not in g.used_variables():
            return self.base.decide(g, base_vars)

        self.last_stats = DecisionStats()
        eliminated = resultant(g, self.section.side_equation(), aux)
        if eliminated.is_zero():
            return Verdict.undecided("resultant with the section equation vanishes")

        involved = set(eliminated.used_variables()) | set(r.used_variables()) | \
            (set(g.used_variables()) - {aux})
        cad_vars = [v for v in base_vars if v in involved]

        def is_negative(point: Dict[str, Fraction]) -> bool:
            return self.section_sign(g, point) < 0

        found = self._screen(g, cad_vars, is_negative)
        if found is None:
            try:
                for point in open_cell_points([eliminated, r], cad_vars, self.last_stats):
                    if is_negative(point):
                        found = point
                        break
            except ProjectionCollapseError as e:
                logger.warning(f"Section projection collapsed: {e}")
                return Verdict.undecided(f"projection degenerate ({e})")

        if found is None:
            logger.debug(f"Section nonnegative on all {self.last_stats.cells_visited} open cells")
            return Verdict.holds_for_all()

        witness = {v: found.get(v, Fraction(0)) for v in base_vars}
        if self.config.shrink_witness:
            witness = shrink_witness(witness, base_vars, is_negative)
        return Verdict.fails(witness)

    def _screen(self, g: MultiPoly, cad_vars: List[str], is_negative) -> Optional[Dict[str, Fraction]]:
        aux = self.section.aux
        g_eval = polynomial_evaluator(g, cad_vars + [aux])
        r_eval = polynomial_evaluator(self.section.radicand, cad_vars)

        def objective(points: np.ndarray) -> np.ndarray:
            points = np.atleast_2d(points)
            with np.errstate(invalid='ignore'):
                u = np.sqrt(np.maximum(r_eval(points), 0.0))
            return g_eval(np.column_stack([points, u]))

        found = self.falsifier.search(
            objective, len(cad_vars), lambda pt: is_negative(dict(zip(cad_vars, pt))))
        if found is None:
            return None
        self.last_stats.screened = True
        return dict(zip(cad_vars, found))


def nonneg_forall_section(g: MultiPoly, section: SectionSpec, variables: Sequence[str],
                          config: Optional[DeciderConfig] = None) -> Verdict:
    """HoldsForAll iff g(x, +sqrt(r(x))) >= 0 for every real x."""
    return SectionDecider(section, config).decide(g, variables)
