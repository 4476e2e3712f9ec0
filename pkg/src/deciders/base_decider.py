"""
Decider Base Types
==================
Verdicts, radical sections and the abstract decider interface.

Every decider answers one question: is a polynomial (possibly evaluated
on a radical section) nonnegative at every real point?
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from src.algebra.polyring import MultiPoly
from src.errors import UsageError


class VerdictKind(Enum):
    HOLDS_FOR_ALL = "holds_for_all"
    FAILS_WITNESS = "fails_witness"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Verdict:
    """
    Outcome of a universal nonnegativity decision.

    A witness is present exactly for FAILS_WITNESS, a reason exactly for
    UNDECIDED.
    """

    kind: VerdictKind
    witness: Optional[Dict[str, Fraction]] = None
    reason: Optional[str] = None

    def __post_init__(self):
        if (self.witness is not None) != (self.kind is VerdictKind.FAILS_WITNESS):
            raise UsageError("a witness is required for, and only for, a failing verdict")
        if (self.reason is not None) != (self.kind is VerdictKind.UNDECIDED):
            raise UsageError("a reason is required for, and only for, an undecided verdict")

    @classmethod
    def holds_for_all(cls) -> "Verdict":
        return cls(VerdictKind.HOLDS_FOR_ALL)

    @classmethod
    def fails(cls, witness: Dict[str, Fraction]) -> "Verdict":
        return cls(VerdictKind.FAILS_WITNESS, witness=dict(witness))

    @classmethod
    def undecided(cls, reason: str) -> "Verdict":
        return cls(VerdictKind.UNDECIDED, reason=reason)

    @property
    def holds(self) -> bool:
        return self.kind is VerdictKind.HOLDS_FOR_ALL

    @property
    def failed(self) -> bool:
        return self.kind is VerdictKind.FAILS_WITNESS

    @property
    def is_undecided(self) -> bool:
        return self.kind is VerdictKind.UNDECIDED

    def to_dict(self) -> Dict:
        data = {'kind': self.kind.value}
        if self.witness is not None:
            data['witness'] = {v: str(c) for v, c in sorted(self.witness.items())}
        if self.reason is not None:
            data['reason'] = self.reason
        return data

    def __str__(self) -> str:
        if self.failed:
            point = ", ".join(f"{v}={c}" for v, c in sorted(self.witness.items()))
            return f"fails at ({point})"
        if self.is_undecided:
            return f"undecided: {self.reason}"
        return "holds for all"


@dataclass(frozen=True)
class SectionSpec:
    """
    The nonnegative branch u = +sqrt(r) of a radical, with u the aux variable
    and r a polynomial in the base variables.
    """

    aux: str
    radicand: MultiPoly
    branch: str = "nonnegative"

    def __post_init__(self):
        if self.aux in self.radicand.used_variables():
            raise UsageError(f"radicand may not contain its own aux variable {self.aux!r}")
        if self.branch != "nonnegative":
            raise UsageError(f"unsupported branch {self.branch!r}")

    def side_equation(self) -> MultiPoly:
        """u^2 - r."""
        u = MultiPoly.variable(self.aux)
        return u * u - self.radicand

    def to_dict(self) -> Dict:
        return {'aux': self.aux, 'radicand': self.radicand.render(), 'branch': self.branch}


@dataclass
class DecisionStats:
    """Counters collected by one decision, logged at DEBUG."""

    levels: List[int] = field(default_factory=list)
    cells_visited: int = 0
    screened: bool = False


class BaseDecider(ABC):
    """
    Abstract base class for nonnegativity deciders.

    Each decider must implement:
    1. decide() - Return a Verdict for a polynomial over the given variables
    2. get_name() - Return decider identifier
    """

    @abstractmethod
    def decide(self, p: MultiPoly, variables: Sequence[str]) -> Verdict:
        """
        Decide whether p >= 0 at every real point.

        Returns:
            Verdict: HOLDS_FOR_ALL, FAILS_WITNESS (with a rational point) or UNDECIDED
        """
        pass

    @abstractmethod
    def get_name(self) -> str:
        """Return decider identifier."""
        pass
