"""
Projection Module
=================
Successive resultant projection down to a univariate candidate polynomial
in the parameter, elimination of radical side equations, and the augmented
projection sets the open-cell decider needs.

Responsibilities:
- project_step: powerfree(res_v(p, dp/dv), keep)
- successive_projection with a step-by-step trace
- radical_eliminate for u^2 = r side equations
- decider_projection (discriminants, leading coefficients, pairwise resultants)

Two reductions keep the resultants small without changing the final
polynomial up to a constant: a polynomial even in v is projected through
v^2, and a polynomial homogeneous in the elimination variables has its last
elimination variable set to 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.algebra.polyring import (
    MultiPoly,
    canonical,
    deflate_even,
    derivative,
    exact_divide,
    is_even_in,
    is_homogeneous_in,
    leading_coeff_and_degree,
    multivar_gcd,
    powerfree,
    resultant,
    squarefree_part,
    substitute,
)
from src.errors import DegenerateProjectionError, ProjectionCollapseError, UsageError

logger = logging.getLogger(__name__)

# Shear multipliers tried, in order, when a resultant vanishes identically.
SHEAR_SEEDS = (1, -1, 2, -2, 3)


# ============================================================================
# TRACE
# ============================================================================

@dataclass
class ProjectionStep:
    """One elimination: the variable, its input, the raw resultant and the powerfree result."""

    variable: str
    input_poly: MultiPoly
    raw_resultant: MultiPoly
    result: MultiPoly
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        raw_degree = self.raw_resultant.total_degree()
        result_degree = self.result.total_degree()
        return {
            'variable': self.variable,
            'input_degree': self.input_poly.total_degree(),
            'input_terms': len(self.input_poly.terms),
            'raw_degree': raw_degree,
            'result_degree': result_degree,
            'powerfree_degree_drop': raw_degree - result_degree,
            'result_variables': list(self.result.used_variables()),
            'notes': list(self.notes),
        }


@dataclass
class ProjectionTrace:
    """The elimination chain from the objective down to the candidate polynomial."""

    param: str
    steps: List[ProjectionStep] = field(default_factory=list)
    final: Optional[MultiPoly] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'param': self.param,
            'steps': [step.to_dict() for step in self.steps],
            'final_degree': None if self.final is None else self.final.degree(self.param),
            'notes': list(self.notes),
        }


# ============================================================================
# SINGLE STEP
# ============================================================================

def _discriminant_resultant(p: MultiPoly, var: str, reductions: bool) -> Tuple[MultiPoly, List[str]]:
    """res_var(p, dp/dvar), possibly replaced by an equivalent smaller product."""
    if reductions and p.degree(var) >= 2 and is_even_in(p, var):
        deflated = deflate_even(p, var)
        at_zero = substitute(p, var, 0)
        core = resultant(deflated, derivative(deflated, var), var)
        return at_zero * core, [f"even in {var}: projected through {var}^2"]
    return resultant(p, derivative(p, var), var), []


def _eliminate(p: MultiPoly, var: str, keep: Iterable[str],
               shear_with: Sequence[str], reductions: bool = True) -> ProjectionStep:
    keep = tuple(keep)
    raw, notes = _discriminant_resultant(p, var, reductions)

    if raw.is_zero():
        g = multivar_gcd(p, derivative(p, var))
        squarefree_in_var = exact_divide(p, g)
        notes.append(f"resultant vanished; squarefree part in {var} taken")
        raw, more = _discriminant_resultant(squarefree_in_var, var, reductions)
        notes.extend(more)
        if raw.is_zero():
            raw = _shear_until_nonzero(squarefree_in_var, var, shear_with, notes, reductions)

    try:
        result = powerfree(raw, keep)
    except DegenerateProjectionError as e:
        raise ProjectionCollapseError(f"eliminating {var}: {e}")
    return ProjectionStep(var, p, raw, result, notes)


def _shear_until_nonzero(p: MultiPoly, var: str, shear_with: Sequence[str],
                         notes: List[str], reductions: bool) -> MultiPoly:
    partners = [w for w in shear_with if w != var and w in p.used_variables()]
    if not partners:
        raise ProjectionCollapseError(f"resultant in {var} vanishes and no variable is available to shear with")
    w = partners[0]
    for lam in SHEAR_SEEDS:
        sheared = substitute(p, var, MultiPoly.variable(var) + lam * MultiPoly.variable(w))
        notes.append(f"shear {var} -> {var} + ({lam})*{w}")
        raw, more = _discriminant_resultant(sheared, var, reductions)
        notes.extend(more)
        if not raw.is_zero():
            logger.info(f"Shear {var} -> {var} + ({lam})*{w} recovered a nonzero resultant")
            return raw
    raise ProjectionCollapseError(f"resultant in {var} vanishes after {len(SHEAR_SEEDS)} shears")


def project_step(p: MultiPoly, var: str, keep: Iterable[str]) -> MultiPoly:
    """
    powerfree(res_var(p, dp/dvar), keep).

    Raises:
        UsageError: p does not involve var
        ProjectionCollapseError: nothing depending on ``keep`` survives
    """
    if p.degree(var) < 1:
        raise UsageError(f"{var!r} does not occur in the polynomial")
    keep = tuple(keep)
    others = [v for v in p.used_variables() if v != var and v not in keep]
    return _eliminate(p, var, keep, others).result


# ============================================================================
# CHAINS
# ============================================================================

def successive_projection(p: MultiPoly, elim_order: Sequence[str], param: str,
                          reductions: bool = True) -> ProjectionTrace:
    """
    Eliminate ``elim_order`` one variable at a time until only ``param`` is left.

    Args:
        p: Polynomial depending on param
        elim_order: Every other variable of p, in elimination order
        param: The variable kept to the end
        reductions: Apply the even and homogeneous reductions

    Returns:
        ProjectionTrace whose ``final`` is squarefree and univariate in param
    """
    used = p.used_variables()
    if param not in used:
        raise UsageError(f"the polynomial does not depend on {param!r}")
    missing = [v for v in used if v != param and v not in elim_order]
    if missing:
        raise UsageError(f"elimination order misses {missing}")

    trace = ProjectionTrace(param=param)
    current = p
    keep = (param,)
    for i, var in enumerate(elim_order):
        present = current.used_variables()
        if present == (param,):
            break
        if var not in present:
            trace.notes.append(f"{var} no longer occurs; skipped")
            continue

        pending = [v for v in elim_order[i:] if v in present]
        if reductions and len(pending) >= 2 and is_homogeneous_in(current, pending):
            last = pending[-1]
            current = substitute(current, last, 1)
            trace.notes.append(f"homogeneous in {', '.join(pending)}: set {last} = 1")

        try:
            step = _eliminate(current, var, keep, pending, reductions)
        except ProjectionCollapseError as e:
            e.trace = trace
            raise
        trace.steps.append(step)
        logger.info(f"Eliminated {var}: degree {step.raw_resultant.total_degree()} resultant, "
                    f"powerfree degree {step.result.total_degree()}")
        current = step.result

    if current.used_variables() != (param,):
        raise ProjectionCollapseError(
            f"projection ended in variables {current.used_variables()}", trace)
    trace.final = canonical(squarefree_part(current)).trim()
    return trace


def radical_eliminate(p: MultiPoly, side_eqs: Sequence[Tuple[str, MultiPoly]],
                      param: str) -> MultiPoly:
    """
    Eliminate each auxiliary variable u with its side equation h(u) = 0 by
    res_u(p, h), keeping the factors that involve ``param``.
    """
    current = p
    for aux, h in side_eqs:
        if h.degree(aux) < 1:
            raise UsageError(f"side equation has no positive degree in {aux!r}")
        if aux not in current.used_variables():
            logger.debug(f"Aux variable {aux} absent; side equation skipped")
            continue
        raw = resultant(current, h, aux)
        if raw.is_zero():
            raise ProjectionCollapseError(f"resultant with the side equation of {aux} vanishes")
        try:
            current = powerfree(raw, (param,))
        except DegenerateProjectionError as e:
            raise ProjectionCollapseError(f"eliminating {aux}: {e}")
        logger.info(f"Eliminated radical {aux}: total degree {current.total_degree()}")
    return current


def decider_projection(polys: Sequence[MultiPoly], var: str,
                       keep: Iterable[str]) -> List[MultiPoly]:
    """
    Projection set making the inputs' open cells sign-invariant over the
    kept variables.

    For each input of positive degree in ``var``: its discriminant-resultant
    and its leading coefficient; one resultant per pair of such inputs;
    inputs free of ``var`` pass through. Everything is made powerfree with
    respect to ``keep`` and constants are dropped.
    """
    keep = tuple(keep)
    movers: List[MultiPoly] = []
    produced: List[MultiPoly] = []
    for p in polys:
        if p.is_zero() or p.is_constant():
            continue
        if p.degree(var) < 1:
            produced.append(p)
            continue
        movers.append(p)
        raw, _ = _discriminant_resultant(p, var, True)
        if raw.is_zero():
            raise ProjectionCollapseError(f"input not squarefree in {var}: {p.render()[:80]}")
        produced.append(raw)
        produced.append(leading_coeff_and_degree(p, var)[0])

    for i, a in enumerate(movers):
        for b in movers[i + 1:]:
            r = resultant(a, b, var)
            if r.is_zero():
                raise ProjectionCollapseError(f"inputs share a factor in {var}")
            produced.append(r)

    result = []
    for q in produced:
        if q.is_constant():
            continue
        try:
            result.append(powerfree(q, keep))
        except DegenerateProjectionError:
            continue
    result = [q.trim() for q in dict.fromkeys(canonical(q) for q in result) if not q.is_constant()]
    result.sort(key=lambda q: (q.total_degree(), q.render()))
    return result
