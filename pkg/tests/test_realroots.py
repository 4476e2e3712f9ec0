import unittest
import sys
import os
from fractions import Fraction

import numpy as np

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.algebra.polyring import MultiPoly, canonical, squarefree_part
from src.algebra.realroots import (
    AlgebraicNumber,
    IsolInterval,
    algnum_approx,
    algnum_compare,
    algnum_sign_at,
    count_roots_in,
    format_decimal,
    isolate_real_roots,
    negate,
    positive_sqrt,
    real_roots,
    refine_to_width,
    restrict_defpoly,
    sample_between,
    sign_at,
    simplest_between,
)
from src.errors import UsageError


def P(text):
    return MultiPoly.from_expr(text)


class TestIsolation(unittest.TestCase):

    def test_sqrt_two(self):
        intervals = isolate_real_roots(P('x**2 - 2'))
        self.assertEqual(len(intervals), 2)
        self.assertTrue(intervals[0].hi < intervals[1].lo)
        self.assertTrue(intervals[0].hi <= 0 <= intervals[1].lo)
        for iv in intervals:
            self.assertFalse(iv.is_degenerate)
            self.assertEqual(sign_at(P('x**2 - 2'), iv.lo) * sign_at(P('x**2 - 2'), iv.hi), -1)

    def test_rational_roots_are_exact(self):
        intervals = isolate_real_roots(P('(2*x - 1)*(x**2 - 2)*(3*x + 7)'))
        self.assertEqual(len(intervals), 4)
        exact = [iv.lo for iv in intervals if iv.is_degenerate]
        self.assertEqual(exact, [Fraction(-7, 3), Fraction(1, 2)])

    def test_no_real_roots(self):
        self.assertEqual(isolate_real_roots(P('x**4 + 1')), [])
        self.assertEqual(isolate_real_roots(MultiPoly.constant(5)), [])

    def test_rejects_non_squarefree(self):
        with self.assertRaises(UsageError):
            isolate_real_roots(P('(x - 1)**2'))
        with self.assertRaises(UsageError):
            isolate_real_roots(MultiPoly.zero(('x',)))

    def test_quartic_root(self):
        roots = real_roots(P('k**4 + 2*k**3 - 5*k**2 - 6*k - 23'))
        self.assertEqual(len(roots), 2)
        top = roots[-1]
        self.assertFalse(top.is_rational)
        self.assertEqual(algnum_approx(top, 9), "2.484435332")
        self.assertEqual(algnum_compare(top, Fraction(159, 64)), 1)
        self.assertEqual(algnum_compare(top, Fraction(319, 128)), -1)

    def test_count_roots_in(self):
        p = P('x**3 - x')
        self.assertEqual(count_roots_in(p, Fraction(-1, 2), 2), 2)
        self.assertEqual(count_roots_in(p, Fraction(1, 3), Fraction(1, 2)), 0)
        with self.assertRaises(UsageError):
            count_roots_in(p, 0, 2)
        with self.assertRaises(UsageError):
            count_roots_in(p, 2, 1)

    def test_refine_keeps_root(self):
        a = real_roots(P('x**2 - 2'))[1]
        refined = refine_to_width(a, Fraction(1, 10 ** 6))
        self.assertLessEqual(refined.interval.width, Fraction(1, 10 ** 6))
        self.assertTrue(a.interval.contains(refined.interval.lo))
        self.assertEqual(count_roots_in(a.defpoly, refined.interval.lo, refined.interval.hi), 1)

    def test_irrational_root_beside_rational_root(self):
        p = P('(x - 4)*(x**2 - 17)')
        intervals = isolate_real_roots(p)
        self.assertEqual(len(intervals), 3)
        self.assertEqual([iv.lo for iv in intervals if iv.is_degenerate], [Fraction(4)])
        for iv in intervals:
            if not iv.is_degenerate:
                self.assertEqual(sign_at(p, iv.lo) * sign_at(p, iv.hi), -1)
                self.assertFalse(iv.contains(4))
        self.assertEqual(len(sample_between(intervals)), 4)

    def test_clustered_rational_and_irrational_roots(self):
        p = P('(x + 2)*(x - 4)*(x**2 - 17)*(x**2 - 5)*(2*x - 9)')
        roots = real_roots(p)
        self.assertEqual(len(roots), 7)
        self.assertEqual([r.rational_value for r in roots if r.is_rational],
                         [Fraction(-2), Fraction(4), Fraction(9, 2)])
        samples = sample_between([r.interval for r in roots])
        for i, r in enumerate(roots):
            self.assertEqual(algnum_compare(r, samples[i]), 1)
            self.assertEqual(algnum_compare(r, samples[i + 1]), -1)


def random_squarefree(rng):
    """Squarefree product of random rational linear factors and a random integer polynomial."""
    x = MultiPoly.variable('x')
    p = MultiPoly.constant(1, ('x',))
    for _ in range(int(rng.integers(0, 3))):
        a, b = int(rng.integers(1, 4)), int(rng.integers(-6, 7))
        p = p * (x.scale(a) - MultiPoly.constant(b))
    degree = int(rng.integers(1, 6))
    terms = {(e,): Fraction(int(rng.integers(-5, 6))) for e in range(degree + 1)}
    terms[(degree,)] = Fraction(int(rng.choice([-3, -2, -1, 1, 2, 3])))
    p = p * MultiPoly(('x',), terms)
    return squarefree_part(p)


class TestIsolationProperties(unittest.TestCase):

    def test_isolation_against_sturm_counts(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            p = random_squarefree(rng)
            if p.is_constant():
                continue
            roots = real_roots(p)
            self.assertEqual(len(roots), int(p.to_poly().count_roots()), msg=p.render())
            samples = sample_between([r.interval for r in roots])
            self.assertEqual(len(samples), len(roots) + 1)
            for i, r in enumerate(roots):
                self.assertEqual(algnum_compare(r, samples[i]), 1, msg=p.render())
                self.assertEqual(algnum_compare(r, samples[i + 1]), -1, msg=p.render())
            for _ in range(3):
                a, b = sorted(Fraction(int(n), 7) for n in rng.integers(-70, 71, size=2))
                if a == b or sign_at(p, a) == 0 or sign_at(p, b) == 0:
                    continue
                inside = sum(1 for r in roots if algnum_compare(r, a) == 1 and algnum_compare(r, b) == -1)
                self.assertEqual(count_roots_in(p, a, b), inside, msg=p.render())


class TestSamples(unittest.TestCase):

    def test_empty(self):
        self.assertEqual(sample_between([]), [Fraction(0)])

    def test_single_exact_root(self):
        self.assertEqual(sample_between([IsolInterval(0, 0)]), [Fraction(-1), Fraction(1)])

    def test_touching_intervals_share_endpoint(self):
        samples = sample_between([IsolInterval(1, 2), IsolInterval(2, 3)])
        self.assertEqual(samples, [Fraction(0), Fraction(2), Fraction(4)])

    def test_gap_gets_simplest_rational(self):
        samples = sample_between([IsolInterval(Fraction(1, 3), Fraction(1, 3)),
                                  IsolInterval(Fraction(1, 2), Fraction(1, 2))])
        self.assertEqual(samples[1], Fraction(2, 5))

    def test_touching_exact_root_rejected(self):
        with self.assertRaises(UsageError):
            sample_between([IsolInterval(1, 1), IsolInterval(1, 2)])

    def test_samples_separate_roots(self):
        roots = real_roots(P('x**3 - 3*x + 1'))
        samples = sample_between([r.interval for r in roots])
        self.assertEqual(len(samples), len(roots) + 1)
        for i, r in enumerate(roots):
            self.assertEqual(algnum_compare(r, samples[i]), 1)
            self.assertEqual(algnum_compare(r, samples[i + 1]), -1)

    def test_simplest_between(self):
        self.assertEqual(simplest_between(Fraction(-1, 2), Fraction(1, 2)), 0)
        self.assertEqual(simplest_between(Fraction(1, 3), Fraction(1, 2)), Fraction(2, 5))
        self.assertEqual(simplest_between(Fraction(-5, 2), Fraction(-9, 4)), Fraction(-7, 3))
        self.assertEqual(simplest_between(Fraction(2), Fraction(3)), Fraction(5, 2))


class TestAlgebraicNumbers(unittest.TestCase):

    def setUp(self):
        self.sqrt2 = real_roots(P('x**2 - 2'))[1]

    def test_sign_at(self):
        self.assertEqual(algnum_sign_at(self.sqrt2, P('x - 1')), 1)
        self.assertEqual(algnum_sign_at(self.sqrt2, P('x**2 - 3')), -1)
        self.assertEqual(algnum_sign_at(self.sqrt2, P('(x**2 - 2)*(x + 5)')), 0)
        self.assertEqual(algnum_sign_at(self.sqrt2, P('x + 1/1000 - 1414/1000')), 1)
        self.assertEqual(algnum_sign_at(self.sqrt2, MultiPoly.constant(-3)), -1)

    def test_sign_rejects_other_variable(self):
        with self.assertRaises(UsageError):
            algnum_sign_at(self.sqrt2, P('y - 1'))

    def test_invalid_numbers(self):
        with self.assertRaises(UsageError):
            AlgebraicNumber(P('x**2 - 2'), IsolInterval(1, 1))
        with self.assertRaises(UsageError):
            AlgebraicNumber(P('x*y - 2'), IsolInterval(1, 2))

    def test_approx(self):
        self.assertEqual(algnum_approx(self.sqrt2, 10), "1.4142135624")
        self.assertEqual(algnum_approx(AlgebraicNumber.from_rational(Fraction(-1, 3)), 3), "-0.333")
        with self.assertRaises(UsageError):
            algnum_approx(self.sqrt2, 0)

    def test_format_decimal_rounds_half_up(self):
        self.assertEqual(format_decimal(Fraction(2, 3), 3), "0.667")
        self.assertEqual(format_decimal(Fraction(1, 8), 2), "0.13")
        self.assertEqual(format_decimal(Fraction(7), 2), "7.00")

    def test_negate(self):
        minus = negate(self.sqrt2)
        self.assertEqual(minus.defpoly, canonical(P('x**2 - 2')))
        self.assertEqual(algnum_compare(minus, -1), -1)
        self.assertEqual(algnum_approx(minus, 5), "-1.41421")
        self.assertEqual(negate(AlgebraicNumber.from_rational(3)).rational_value, -3)

    def test_positive_sqrt(self):
        self.assertEqual(positive_sqrt(Fraction(9, 4)).rational_value, Fraction(3, 2))
        self.assertEqual(positive_sqrt(0).rational_value, 0)
        root = positive_sqrt(2)
        self.assertEqual(root.variable, 'u')
        self.assertEqual(algnum_approx(root, 6), "1.414214")
        with self.assertRaises(UsageError):
            positive_sqrt(-1)

    def test_restrict_defpoly(self):
        a = real_roots(P('(x**2 - 2)*(x**2 - 3)'))[-1]
        restricted = restrict_defpoly(a, P('x**3 - 3*x'))
        self.assertEqual(restricted.defpoly, canonical(P('x**2 - 3')))
        self.assertIsNone(restrict_defpoly(a, P('x - 1')))

    def test_float(self):
        self.assertAlmostEqual(float(self.sqrt2), 2 ** 0.5, places=12)


if __name__ == '__main__':
    unittest.main()
