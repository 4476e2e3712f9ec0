"""
Optimizer Engine
================
End-to-end driver: greatest (or least) k with F(k, x) >= 0 for all
admissible x, as an exact real algebraic number.

Pipeline:
- preprocess: nonneg variables become squares, min becomes max under k -> -k
- candidate_set: radical elimination, successive projection, isolation
- probe_unbounded: decide the cell above every candidate root
- solve_monotone / solve_scan: classify candidate roots by exact decisions
- solve: orchestration, mapping back, ledger and caveats
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from src.algebra.polyring import MultiPoly, Scalar, canonical, substitute, to_fraction
from src.algebra.projection import ProjectionTrace, radical_eliminate, successive_projection
from src.algebra.realroots import (
    AlgebraicNumber,
    algnum_sign_at,
    count_roots_in,
    negate,
    real_roots,
    sample_between,
)
from src.deciders.base_decider import BaseDecider, SectionSpec, Verdict
from src.deciders.nonneg_decider import (
    DeciderConfig,
    MonotonicityClass,
    NonnegDecider,
    endpoint_test,
    monotonicity_class,
)
from src.deciders.section_decider import SectionDecider
from src.errors import KboundError, ProjectionCollapseError, ResourceLimitError, UsageError

logger = logging.getLogger(__name__)

# Names handed out, in order, to the square roots of nonneg variables.
FRESH_NAMES = ('x', 'y', 'z', 'w', 'v', 's', 't')


# ============================================================================
# ENUMS
# ============================================================================

class Direction(Enum):
    MAX = "max"
    MIN = "min"


class Domain(Enum):
    REAL = "real"
    NONNEG = "nonneg"


class SolveStatus(Enum):
    FOUND = "found"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    UNDECIDED = "undecided"


class SolveMode(Enum):
    AUTO = "auto"
    MONOTONE = "monotone"
    SCAN = "scan"


class ProbeOutcome(Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    UNDECIDED = "undecided"


class CandidateFate(Enum):
    CHOSEN = "chosen"
    FEASIBLE_NOT_MAX = "feasible-not-max"
    FAILED = "failed"
    IGNORED_BELOW_TRANSITION = "ignored-below-transition"
    UNDECIDED = "undecided"


# ============================================================================
# CONFIGURATION
# ============================================================================

@dataclass
class SolverConfig:
    """Configuration for the optimizer engine."""

    mode: SolveMode = SolveMode.AUTO
    elim_order: Optional[List[str]] = None   # names after preprocessing
    reductions: bool = True                  # even/homogeneous projection shortcuts
    decider: DeciderConfig = field(default_factory=DeciderConfig)


# ============================================================================
# DATA MODELS
# ============================================================================

@dataclass(frozen=True)
class ProblemSpec:
    """
    One optimization problem: the objective family F(param, vars), the
    direction and the domain of each variable. Radicals appear as aux
    variables described by ``sections``.
    """

    objective: MultiPoly
    param: str
    direction: Direction = Direction.MAX
    var_domains: Dict[str, Domain] = field(default_factory=dict)
    sections: Tuple[SectionSpec, ...] = ()
    negated: bool = False
    renaming: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'sections', tuple(self.sections))
        if self.param not in self.objective.used_variables():
            raise UsageError(f"the objective does not involve the parameter {self.param!r}")
        if self.param in self.var_domains:
            raise UsageError(f"{self.param!r} is both the parameter and a variable")
        aux = set(self.aux_variables)
        uncovered = [v for v in self.objective.used_variables()
                     if v != self.param and v not in aux and v not in self.var_domains]
        for section in self.sections:
            uncovered += [v for v in section.radicand.used_variables() if v not in self.var_domains]
        if uncovered:
            raise UsageError(f"no domain given for {sorted(set(uncovered))}")

    @property
    def variables(self) -> List[str]:
        return list(self.var_domains)

    @property
    def aux_variables(self) -> List[str]:
        return [s.aux for s in self.sections]

    def is_affine(self) -> bool:
        return self.objective.degree(self.param) <= 1


@dataclass
class CandidateSet:
    """Candidate polynomial in the parameter, its real roots and the interleaving samples."""

    candidate_poly: MultiPoly
    roots: List[AlgebraicNumber]
    samples: List[Fraction]
    trace: Optional[ProjectionTrace] = None


@dataclass
class CandidateRecord:
    """Ledger entry: one candidate root and what happened to it."""

    root: AlgebraicNumber
    fate: CandidateFate
    reason: str = ""
    verdict: Optional[Verdict] = None


@dataclass
class DecisionRecord:
    """One exact decision taken at a rational parameter value."""

    value: Fraction
    purpose: str
    verdict: Verdict


@dataclass
class OptimizationResult:
    """Outcome of solve: status, exact optimum, candidate ledger, caveats and trace."""

    status: SolveStatus
    param: str = "k"
    direction: Direction = Direction.MAX
    optimum: Optional[AlgebraicNumber] = None
    candidate_poly: Optional[MultiPoly] = None
    candidates: List[CandidateRecord] = field(default_factory=list)
    caveats: List[str] = field(default_factory=list)
    trace: Optional[ProjectionTrace] = None
    decisions: List[DecisionRecord] = field(default_factory=list)
    monotonicity: Optional[MonotonicityClass] = None
    bound_certificate: Optional[MultiPoly] = None
    reason: str = ""


# ============================================================================
# ENGINE
# ============================================================================

class OptimizerEngine:
    """
    Computes the optimum of the parameter for one ProblemSpec.

    Decisions at rational parameter values are cached per engine, so the
    probe, the monotone search and the scan never repeat a decision.
    """

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self._verdicts: Dict[Tuple, Verdict] = {}
        self._deciders: Dict[Tuple, BaseDecider] = {}
        self.decisions: List[DecisionRecord] = []
        self.caveats: List[str] = []
        self.bound_certificate: Optional[MultiPoly] = None

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _decider_for(self, spec: ProblemSpec) -> BaseDecider:
        key = spec.sections
        if key not in self._deciders:
            if not spec.sections:
                self._deciders[key] = NonnegDecider(self.config.decider)
            elif len(spec.sections) == 1:
                self._deciders[key] = SectionDecider(spec.sections[0], self.config.decider)
            else:
                raise UsageError("only one radical section per problem is supported")
        return self._deciders[key]

    def _check_elim_order(self, spec: ProblemSpec):
        """A user-supplied elimination order must name every eliminated variable."""
        if not self.config.elim_order:
            return
        used = set(spec.objective.used_variables())
        for section in spec.sections:
            used |= set(section.radicand.used_variables())
        used -= {spec.param, *spec.aux_variables}
        unknown = sorted(v for v in used if v not in self.config.elim_order)
        if unknown:
            raise UsageError(f"elimination order misses {unknown}")

    def _quantified(self, spec: ProblemSpec) -> List[str]:
        return spec.variables + spec.aux_variables

    def _test(self, spec: ProblemSpec, value: Scalar, purpose: str) -> Verdict:
        value = to_fraction(value)
        key = (spec.objective, spec.sections, value)
        if key not in self._verdicts:
            verdict = endpoint_test(spec.objective, spec.param, value,
                                    self._quantified(spec), self._decider_for(spec))
            self._verdicts[key] = verdict
            logger.info(f"{spec.param} = {value} ({purpose}): {verdict}")
            if verdict.is_undecided:
                self.caveats.append(f"decision at {spec.param} = {value} undecided: {verdict.reason}")
        verdict = self._verdicts[key]
        self.decisions.append(DecisionRecord(value, purpose, verdict))
        return verdict

    # ------------------------------------------------------------------
    # Pipeline stages
    # ------------------------------------------------------------------

    def preprocess(self, spec: ProblemSpec) -> ProblemSpec:
        """
        Replace every nonneg variable v by a fresh w with v = w^2 and turn a
        minimization into a maximization by k -> -k.
        """
        taken = set(spec.var_domains) | {spec.param} | set(spec.aux_variables) \
            | set(spec.objective.used_variables())
        fresh = _fresh_names(taken)

        objective = spec.objective
        sections = list(spec.sections)
        domains: Dict[str, Domain] = {}
        renaming = dict(spec.renaming)
        for var, domain in spec.var_domains.items():
            if domain is Domain.REAL:
                domains[var] = Domain.REAL
                continue
            name = next(fresh)
            square = MultiPoly.variable(name) ** 2
            if var in objective.variables:
                objective = substitute(objective, var, square)
            sections = [replace(s, radicand=substitute(s.radicand, var, square))
                        if var in s.radicand.variables else s for s in sections]
            domains[name] = Domain.REAL
            renaming[var] = name
            logger.info(f"Nonneg variable {var} replaced by {name}^2")

        negated = spec.negated
        direction = spec.direction
        if direction is Direction.MIN:
            objective = substitute(objective, spec.param, -MultiPoly.variable(spec.param))
            negated = not negated
            direction = Direction.MAX
            logger.info(f"Minimization normalized by {spec.param} -> -{spec.param}")

        return ProblemSpec(objective=objective, param=spec.param, direction=direction,
                           var_domains=domains, sections=tuple(sections),
                           negated=negated, renaming=renaming)

    def candidate_set(self, spec: ProblemSpec) -> CandidateSet:
        """Project to the candidate polynomial in the parameter and isolate its roots."""
        p = spec.objective
        if spec.sections:
            p = radical_eliminate(p, [(s.aux, s.side_equation()) for s in spec.sections],
                                  spec.param)

        present = [v for v in p.used_variables() if v != spec.param]
        if self.config.elim_order:
            order = list(self.config.elim_order)
            unknown = [v for v in present if v not in order]
            if unknown:
                raise UsageError(f"elimination order misses {unknown}")
        else:
            order = [v for v in spec.variables if v in present]
            order += [v for v in present if v not in order]

        trace = successive_projection(p, order, spec.param, self.config.reductions)
        roots = real_roots(trace.final)
        samples = sample_between([r.interval for r in roots])
        logger.info(f"Candidate polynomial of degree {trace.final.degree(spec.param)} "
                    f"with {len(roots)} real roots")
        return CandidateSet(trace.final, roots, samples, trace)

    def probe_unbounded(self, spec: ProblemSpec, cs: CandidateSet) -> Tuple[ProbeOutcome, Verdict]:
        """Decide the cell above every candidate root."""
        top = cs.samples[-1]
        verdict = self._test(spec, top, "top cell")
        if verdict.holds:
            return ProbeOutcome.UNBOUNDED, verdict
        if verdict.is_undecided:
            return ProbeOutcome.UNDECIDED, verdict

        point = {v: c for v, c in verdict.witness.items() if v in spec.objective.variables}
        certificate = spec.objective
        for var, value in point.items():
            certificate = substitute(certificate, var, value)
        self.bound_certificate = certificate
        logger.info(f"Bound certificate at {point}: {certificate.render()} >= 0")
        return ProbeOutcome.BOUNDED, verdict

    def check_rational_candidate(self, spec: ProblemSpec, value: Scalar) -> Verdict:
        """Exact endpoint test at a rational root of the candidate polynomial."""
        return self._test(spec, value, "rational candidate")

    def solve_monotone(self, spec: ProblemSpec, cs: CandidateSet) -> OptimizationResult:
        """
        F decreasing in the parameter: the feasible set is a closed down-set,
        so binary search over the samples finds the transition and the
        optimum is the unique root between the last holding and the first
        failing sample.
        """
        samples = cs.samples
        lo, hi = -1, len(samples) - 1
        if not self._test(spec, samples[hi], "top cell").failed:
            raise KboundError("monotone search needs a failing top cell")

        first = self._test(spec, samples[0], "monotone search")
        if first.failed:
            records = [CandidateRecord(r, CandidateFate.FAILED, "above the failing bottom cell")
                       for r in cs.roots]
            return OptimizationResult(SolveStatus.INFEASIBLE, candidates=records,
                                      reason="the cell below every candidate fails")
        if first.is_undecided:
            return self._undecided_monotone(cs, "bottom cell undecided")
        lo = 0

        while hi - lo > 1:
            mid = (lo + hi) // 2
            verdict = self._test(spec, samples[mid], "monotone search")
            if verdict.holds:
                lo = mid
            elif verdict.failed:
                hi = mid
            else:
                return self._undecided_monotone(cs, f"sample {samples[mid]} undecided")

        alpha, beta = samples[lo], samples[hi]
        count = count_roots_in(cs.candidate_poly, alpha, beta)
        if count != 1:
            raise KboundError(f"expected exactly one candidate in ({alpha}, {beta}), found {count}")
        optimum = cs.roots[lo]

        records = []
        for i, root in enumerate(cs.roots):
            if i < lo:
                records.append(CandidateRecord(root, CandidateFate.FEASIBLE_NOT_MAX,
                                               "below the transition of a decreasing family"))
            elif i == lo:
                records.append(CandidateRecord(root, CandidateFate.CHOSEN,
                                               f"unique root between {alpha} (holds) and {beta} (fails)"))
            else:
                records.append(CandidateRecord(root, CandidateFate.FAILED,
                                               f"above the failing sample {beta}"))

        result = OptimizationResult(SolveStatus.FOUND, optimum=optimum, candidates=records)
        if optimum.is_rational:
            exact = self.check_rational_candidate(spec, optimum.rational_value)
            records[lo].verdict = exact
            if not exact.holds:
                result.status = SolveStatus.UNDECIDED
                result.reason = f"exact check at the rational optimum returned: {exact}"
        return result

    def _undecided_monotone(self, cs: CandidateSet, reason: str) -> OptimizationResult:
        records = [CandidateRecord(r, CandidateFate.UNDECIDED, reason) for r in cs.roots]
        return OptimizationResult(SolveStatus.UNDECIDED, candidates=records, reason=reason)

    def solve_scan(self, spec: ProblemSpec, cs: CandidateSet) -> OptimizationResult:
        """
        Walk the candidate roots from the top down. A root whose lower cell
        holds is feasible (the feasible set is closed); a rational root is
        also tried exactly. For families affine in the parameter the
        feasible set is an interval, which makes the first feasible root the
        maximum.
        """
        affine = spec.is_affine()
        samples = cs.samples
        records: Dict[int, CandidateRecord] = {}
        isolated: List[int] = []
        undecided_above = False

        above = self._test(spec, samples[-1], "top cell")
        for j in range(len(cs.roots) - 1, -1, -1):
            root = cs.roots[j]
            below = self._test(spec, samples[j], "cell below candidate")
            if below.holds:
                records[j] = CandidateRecord(root, CandidateFate.CHOSEN,
                                             f"cell below ({samples[j]}) holds; cell above fails",
                                             below)
                return self._finish_scan(cs, records, j, isolated, undecided_above, affine)

            if root.is_rational:
                exact = self.check_rational_candidate(spec, root.rational_value)
                if exact.holds:
                    records[j] = CandidateRecord(root, CandidateFate.CHOSEN,
                                                 "exact check at the rational root holds", exact)
                    return self._finish_scan(cs, records, j, isolated, undecided_above, affine)
                fate = CandidateFate.UNDECIDED if exact.is_undecided else CandidateFate.FAILED
                undecided_above |= exact.is_undecided
                records[j] = CandidateRecord(root, fate, "exact check at the rational root", exact)
            elif below.failed and above.failed:
                isolated.append(j)
                records[j] = CandidateRecord(root, CandidateFate.UNDECIDED,
                                             "both adjacent cells fail; isolated feasibility not excluded")
            else:
                records[j] = CandidateRecord(root, CandidateFate.UNDECIDED,
                                             "adjacent cell undecided")
            undecided_above |= below.is_undecided
            above = below

        if isolated or undecided_above:
            return OptimizationResult(SolveStatus.UNDECIDED, candidates=_ordered(records),
                                      reason="possible isolated feasible point")
        return OptimizationResult(SolveStatus.INFEASIBLE, candidates=_ordered(records),
                                  reason="every cell and every rational candidate fails")

    def _finish_scan(self, cs: CandidateSet, records: Dict[int, CandidateRecord], chosen: int,
                     isolated: List[int], undecided_above: bool, affine: bool) -> OptimizationResult:
        for i in range(chosen):
            records[i] = CandidateRecord(cs.roots[i], CandidateFate.IGNORED_BELOW_TRANSITION,
                                         "below the chosen root")
        result = OptimizationResult(SolveStatus.FOUND, optimum=cs.roots[chosen])
        if affine:
            for j in isolated:
                records[j] = CandidateRecord(cs.roots[j], CandidateFate.FAILED,
                                             "excluded by convexity of the feasible set")
        else:
            result.caveats.append("maximal verified candidate")
        if undecided_above:
            result.status = SolveStatus.UNDECIDED
            result.reason = "an undecided cell above the chosen root may be feasible"
        result.candidates = _ordered(records)
        return result

    # ------------------------------------------------------------------
    # Orchestration
    # ------------------------------------------------------------------

    def solve(self, spec: ProblemSpec) -> OptimizationResult:
        """
        Run the whole pipeline and map the answer back to the caller's
        direction. Sub-errors become an UNDECIDED status with a reason.
        """
        self.decisions = []
        self.caveats = []
        self.bound_certificate = None

        pre = self.preprocess(spec)
        if len(pre.sections) > 1:
            return self._wrap(spec, pre, OptimizationResult(
                SolveStatus.UNDECIDED, reason="only one radical section per problem is supported"), None)

        self._check_elim_order(pre)
        try:
            cs = self.candidate_set(pre)
        except ResourceLimitError:
            raise
        except ProjectionCollapseError as e:
            logger.error(f"Candidate projection failed: {e}")
            result = OptimizationResult(SolveStatus.UNDECIDED, reason=f"projection collapse: {e}",
                                        trace=e.trace)
            return self._wrap(spec, pre, result, None)
        except KboundError as e:
            logger.error(f"Candidate set failed: {e}")
            result = OptimizationResult(SolveStatus.UNDECIDED, reason=f"candidate set: {e}")
            return self._wrap(spec, pre, result, None)

        try:
            result = self._classify(pre, cs)
        except ResourceLimitError:
            raise
        except KboundError as e:
            logger.error(f"Classification failed: {e}")
            result = OptimizationResult(SolveStatus.UNDECIDED, reason=str(e))

        if result.status is SolveStatus.FOUND:
            if algnum_sign_at(result.optimum, cs.candidate_poly) != 0:
                raise KboundError("optimum is not a root of the candidate polynomial")
        self._monitor_convexity(pre)
        return self._wrap(spec, pre, result, cs)

    def _classify(self, pre: ProblemSpec, cs: CandidateSet) -> OptimizationResult:
        outcome, verdict = self.probe_unbounded(pre, cs)
        if outcome is ProbeOutcome.UNBOUNDED:
            records = [CandidateRecord(r, CandidateFate.IGNORED_BELOW_TRANSITION,
                                       "the top cell is feasible") for r in cs.roots]
            return OptimizationResult(SolveStatus.UNBOUNDED, candidates=records,
                                      reason="the cell above every candidate holds")
        if outcome is ProbeOutcome.UNDECIDED:
            records = [CandidateRecord(r, CandidateFate.UNDECIDED, "top cell undecided")
                       for r in cs.roots]
            return OptimizationResult(SolveStatus.UNDECIDED, candidates=records,
                                      reason="existence of an optimum not established: top cell undecided")

        mode = self.config.mode
        if mode is SolveMode.SCAN:
            return self.solve_scan(pre, cs)

        base_vars = pre.variables + pre.aux_variables
        monotone, caveats = monotonicity_class(pre.objective, pre.param, base_vars,
                                               self._decider_for(pre))
        self.caveats.extend(caveats)
        logger.info(f"Monotonicity in {pre.param}: {monotone.value}")

        if monotone is MonotonicityClass.DECREASING:
            result = self.solve_monotone(pre, cs)
        elif monotone is MonotonicityClass.INCREASING:
            records = [CandidateRecord(r, CandidateFate.FAILED, "increasing family with a failing top cell")
                       for r in cs.roots]
            result = OptimizationResult(SolveStatus.INFEASIBLE, candidates=records,
                                        reason="the family increases in the parameter yet the top cell fails")
        else:
            if mode is SolveMode.MONOTONE:
                self.caveats.append("objective is not monotone in the parameter; fell back to scan")
            result = self.solve_scan(pre, cs)
        result.monotonicity = monotone
        return result

    def _monitor_convexity(self, pre: ProblemSpec):
        """For affine families the holding samples must form one contiguous run."""
        if not pre.is_affine():
            return
        tested = sorted({d.value: d.verdict for d in self.decisions}.items())
        kinds = [v.holds for _, v in tested if not v.is_undecided]
        runs = sum(1 for i, h in enumerate(kinds) if h and (i == 0 or not kinds[i - 1]))
        if runs > 1:
            message = "holding samples are not contiguous although the family is affine"
            logger.warning(message)
            self.caveats.append(message)

    def _wrap(self, spec: ProblemSpec, pre: ProblemSpec, result: OptimizationResult,
              cs: Optional[CandidateSet]) -> OptimizationResult:
        result.param = spec.param
        result.direction = spec.direction
        result.decisions = list(self.decisions)
        result.bound_certificate = self.bound_certificate
        if cs is not None:
            result.trace = cs.trace
            result.candidate_poly = cs.candidate_poly
        for caveat in self.caveats:
            if caveat not in result.caveats:
                result.caveats.append(caveat)
        if result.status is SolveStatus.UNDECIDED and result.reason and result.reason not in result.caveats:
            result.caveats.append(result.reason)

        if pre.negated:
            result = _map_negated(result, pre.param)
        return result


# ============================================================================
# HELPERS
# ============================================================================

def _fresh_names(taken) -> Iterator[str]:
    for name in FRESH_NAMES:
        if name not in taken:
            yield name
    i = 1
    while True:
        name = f"x{i}"
        if name not in taken:
            yield name
        i += 1


def _ordered(records: Dict[int, CandidateRecord]) -> List[CandidateRecord]:
    return [records[i] for i in sorted(records)]


def _map_negated(result: OptimizationResult, param: str) -> OptimizationResult:
    """Undo k -> -k: negate the optimum, roots, samples and candidate polynomial."""
    if result.optimum is not None:
        result.optimum = negate(result.optimum)
    if result.candidate_poly is not None:
        k = MultiPoly.variable(param)
        result.candidate_poly = canonical(substitute(result.candidate_poly, param, -k)).trim()
    result.candidates = [replace(r, root=negate(r.root)) for r in reversed(result.candidates)]
    result.decisions = [replace(d, value=-d.value) for d in result.decisions]
    if result.bound_certificate is not None and param in result.bound_certificate.variables:
        result.bound_certificate = substitute(result.bound_certificate, param,
                                              -MultiPoly.variable(param))
    return result


def solve(spec: ProblemSpec, config: Optional[SolverConfig] = None) -> OptimizationResult:
    """Convenience wrapper around OptimizerEngine.solve."""
    return OptimizerEngine(config).solve(spec)
