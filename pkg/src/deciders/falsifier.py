"""
Numeric Falsifier
=================
Fast search for a point where a polynomial is negative.

Responsibilities:
- Float evaluation of MultiPoly on batches of points (numpy)
- Grid screen followed by Nelder-Mead polishing (scipy)
- Rationalizing candidates and confirming them EXACTLY

The screen can only ever produce failures. A point is reported only after
the exact predicate confirms it, so floating-point error can delay a
witness but never fabricate one.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from src.algebra.polyring import MultiPoly

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]

# Denominators tried, in order, when rationalizing a float minimizer.
RATIONALIZE_DENOMINATORS = (1, 2, 4, 8, 16, 64, 256, 1024, 2 ** 14, 2 ** 20)


@dataclass
class ScreenConfig:
    """Settings of the numeric screen."""
    enabled: bool = True
    half_width: int = 2           # grid covers [-half_width, half_width]^n
    points_per_axis: int = 17
    max_points: int = 20000
    polish_starts: int = 4
    max_iterations: int = 400


def polynomial_evaluator(p: MultiPoly, variables: Sequence[str]) -> Callable[[np.ndarray], np.ndarray]:
    """
    Vectorized float evaluation: maps an (N, n) array of points to N values.
    """
    variables = list(variables)
    aligned = p.with_variables(tuple(variables))
    monomials = list(aligned.terms)
    exponents = np.array(monomials, dtype=float).reshape(len(monomials), len(variables))
    coeffs = np.array([float(aligned.terms[m]) for m in monomials])

    def evaluate(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if not monomials:
            return np.zeros(points.shape[0])
        with np.errstate(over='ignore', invalid='ignore'):
            powers = np.prod(points[:, None, :] ** exponents[None, :, :], axis=2)
            return powers @ coeffs

    return evaluate


class Falsifier:
    """
    Looks for a rational point where an exact predicate reports negativity,
    guided by a float objective.
    """

    def __init__(self, config: Optional[ScreenConfig] = None):
        self.config = config or ScreenConfig()

    def _grid(self, n: int) -> List[Fraction]:
        cfg = self.config
        per_axis = cfg.points_per_axis
        while per_axis > 3 and per_axis ** n > cfg.max_points:
            per_axis -= 2
        span = 2 * cfg.half_width
        return [Fraction(span * i, per_axis - 1) - cfg.half_width for i in range(per_axis)]

    def search(self, objective: Callable[[np.ndarray], np.ndarray], n: int,
               is_negative: Callable[[Point], bool]) -> Optional[Point]:
        """
        Args:
            objective: Float evaluator over (N, n) arrays
            n: Number of variables
            is_negative: Exact test of a rational point

        Returns:
            A rational point confirmed by ``is_negative``, or None
        """
        if not self.config.enabled or n == 0:
            return None

        axis = self._grid(n)
        mesh = np.array(np.meshgrid(*[[float(a) for a in axis]] * n, indexing='ij'))
        points = mesh.reshape(n, -1).T
        values = objective(points)
        values = np.where(np.isfinite(values), values, np.inf)
        order = np.argsort(values, kind='stable')

        starts = []
        for idx in order[:self.config.polish_starts]:
            flat = np.unravel_index(idx, (len(axis),) * n)
            exact = tuple(axis[i] for i in flat)
            if values[idx] < 0 and is_negative(exact):
                logger.debug(f"Grid screen found a negative point {exact}")
                return exact
            starts.append(points[idx])

        for x0 in starts:
            found = self._polish(objective, x0, is_negative)
            if found is not None:
                return found
        return None

    def _polish(self, objective, x0: np.ndarray, is_negative) -> Optional[Point]:
        def scalar(x):
            value = objective(np.asarray(x)[None, :])[0]
            return value if np.isfinite(value) else 1e300

        try:
            result = minimize(scalar, x0, method='Nelder-Mead',
                              options={'maxiter': self.config.max_iterations * len(x0),
                                       'xatol': 1e-10, 'fatol': 1e-14})
        except Exception as e:
            logger.debug(f"Nelder-Mead polish failed: {e}")
            return None
        if not np.all(np.isfinite(result.x)) or not result.fun < 0:
            return None
        for denominator in RATIONALIZE_DENOMINATORS:
            candidate = tuple(Fraction(int(round(c * denominator)), denominator) for c in result.x)
            if is_negative(candidate):
                logger.debug(f"Polish found a negative point {candidate}")
                return candidate
        return None


def shrink_witness(point: Dict[str, Fraction], variables: Sequence[str],
                   is_negative: Callable[[Dict[str, Fraction]], bool]) -> Dict[str, Fraction]:
    """
    Replace coordinates by nearby integers or halves while the point stays
    negative; coordinates are tried in variable order.
    """
    current = dict(point)
    for var in variables:
        value = current[var]
        if value.denominator <= 2:
            continue
        floor = value.numerator // value.denominator
        options = [Fraction(round(value)), Fraction(floor), Fraction(floor + 1),
                   Fraction(round(2 * value), 2)]
        for option in dict.fromkeys(options):
            trial = dict(current)
            trial[var] = option
            if is_negative(trial):
                current = trial
                break
    return current
