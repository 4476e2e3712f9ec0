import unittest
import sys
import os
from fractions import Fraction

import numpy as np

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.algebra.polyring import MultiPoly, eval_at, substitute
from src.deciders.base_decider import SectionSpec, Verdict, VerdictKind
from src.deciders.falsifier import ScreenConfig, polynomial_evaluator, shrink_witness
from src.deciders.nonneg_decider import (
    DeciderConfig,
    MonotonicityClass,
    NonnegDecider,
    endpoint_test,
    monotonicity_class,
    nonneg_forall,
    open_cell_points,
)
from src.deciders.section_decider import SectionDecider, nonneg_forall_section
from src.errors import UsageError


def P(text, variables=None):
    return MultiPoly.from_expr(text, variables)


NO_SCREEN = DeciderConfig(screen=ScreenConfig(enabled=False))


class TestVerdict(unittest.TestCase):

    def test_witness_only_for_failures(self):
        with self.assertRaises(UsageError):
            Verdict(VerdictKind.HOLDS_FOR_ALL, witness={'x': Fraction(0)})
        with self.assertRaises(UsageError):
            Verdict(VerdictKind.UNDECIDED)

    def test_to_dict(self):
        verdict = Verdict.fails({'y': Fraction(1, 2), 'x': Fraction(-1)})
        self.assertEqual(verdict.to_dict(), {'kind': 'fails_witness', 'witness': {'x': '-1', 'y': '1/2'}})
        self.assertEqual(str(verdict), "fails at (x=-1, y=1/2)")
        self.assertEqual(Verdict.undecided("why").to_dict()['reason'], "why")


class TestFalsifier(unittest.TestCase):

    def test_vectorized_evaluation(self):
        evaluate = polynomial_evaluator(P('x**2 + y'), ['x', 'y'])
        values = evaluate(np.array([[1.0, 2.0], [0.0, 0.0], [-2.0, -1.0]]))
        np.testing.assert_allclose(values, [3.0, 0.0, 3.0])

    def test_shrink_witness(self):
        point = shrink_witness({'x': Fraction(7, 3)}, ['x'], lambda pt: pt['x'] > 2)
        self.assertEqual(point, {'x': Fraction(3)})
        point = shrink_witness({'x': Fraction(1, 2)}, ['x'], lambda pt: True)
        self.assertEqual(point, {'x': Fraction(1, 2)})


class TestNonnegDecider(unittest.TestCase):

    def test_constants(self):
        self.assertTrue(nonneg_forall(MultiPoly.constant(0), ['x']).holds)
        verdict = nonneg_forall(MultiPoly.constant(-1), ['x'])
        self.assertTrue(verdict.failed)
        self.assertEqual(verdict.witness, {'x': Fraction(0)})

    def test_motzkin_holds(self):
        verdict = nonneg_forall(P('x**4*y**2 + x**2*y**4 - 3*x**2*y**2 + 1'), ['x', 'y'])
        self.assertTrue(verdict.holds)

    def test_unit_disk_fails_first_cell(self):
        decider = NonnegDecider(NO_SCREEN)
        verdict = decider.decide(P('x**2 + y**2 - 1'), ['x', 'y'])
        self.assertTrue(verdict.failed)
        self.assertEqual(verdict.witness, {'x': Fraction(0), 'y': Fraction(0)})
        self.assertGreater(decider.last_stats.cells_visited, 1)

    def test_odd_form_fails(self):
        p = P('x**3 + y**3')
        verdict = NonnegDecider(NO_SCREEN).decide(p, ['x', 'y'])
        self.assertTrue(verdict.failed)
        self.assertLess(eval_at(p, verdict.witness), 0)

    def test_even_form_holds(self):
        verdict = NonnegDecider(NO_SCREEN).decide(P('x**2 - x*y + y**2'), ['x', 'y'])
        self.assertTrue(verdict.holds)

    def test_unquantified_variable(self):
        with self.assertRaises(UsageError):
            nonneg_forall(P('x + y'), ['x'])

    def test_quadratic_oracle(self):
        rng = np.random.default_rng(42)
        for a, b, c in rng.integers(-3, 4, size=(25, 3)):
            a, b, c = int(a), int(b), int(c)
            p = MultiPoly.from_expr(f"({a})*x**2 + ({b})*x + ({c})", ['x'])
            expected = (a > 0 and b * b <= 4 * a * c) or (a == 0 and b == 0 and c >= 0)
            for config in (None, NO_SCREEN):
                verdict = nonneg_forall(p, ['x'], config)
                self.assertEqual(verdict.holds, expected, msg=f"{p.render()}")
                if verdict.failed:
                    self.assertLess(eval_at(p, verdict.witness), 0)

    def test_open_cell_points_cover_sign_pattern(self):
        points = list(open_cell_points([P('x*y - 1')], ['x', 'y']))
        signs = {(eval_at(P('x*y - 1'), pt) > 0) for pt in points}
        self.assertEqual(signs, {True, False})
        self.assertEqual(points, sorted(points, key=lambda pt: (pt['x'], pt['y'])))


def random_poly(rng, variables, degree):
    """Random polynomial with coefficients in -3..3 and total degree <= degree."""
    names = list(variables)
    terms = {}
    for monom in np.ndindex(*([degree + 1] * len(names))):
        if sum(monom) <= degree and rng.random() < 0.6:
            terms[tuple(int(e) for e in monom)] = Fraction(int(rng.integers(-3, 4)))
    return MultiPoly(tuple(names), terms)


def grid_has_negative(p, variables):
    """Exactly confirmed negative value on a dyadic grid over [-4, 4]^n."""
    axis = np.arange(-32, 33) / 8 if len(variables) == 1 else np.arange(-16, 17) / 4
    grid = np.array(np.meshgrid(*([axis] * len(variables)), indexing='ij')).reshape(len(variables), -1).T
    values = polynomial_evaluator(p, variables)(grid)
    for row in grid[values < -1e-9]:
        point = {v: Fraction(float(c)).limit_denominator(8) for v, c in zip(variables, row)}
        if eval_at(p, point) < 0:
            return True
    return False


class TestDeciderProperties(unittest.TestCase):

    def test_grid_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(500):
            variables = ['x'] if rng.random() < 0.5 else ['x', 'y']
            p = random_poly(rng, variables, int(rng.integers(1, 5)))
            verdict = nonneg_forall(p, variables)
            self.assertFalse(verdict.is_undecided, msg=p.render())
            negative = grid_has_negative(p, variables)
            if negative:
                self.assertTrue(verdict.failed, msg=p.render())
            if verdict.holds:
                self.assertFalse(negative, msg=p.render())
            if verdict.failed:
                self.assertLess(eval_at(p, verdict.witness), 0, msg=p.render())

    def test_positive_scaling_and_shift(self):
        rng = np.random.default_rng(42)
        x = MultiPoly.variable('x')
        for _ in range(8):
            p = random_poly(rng, ['x'], 4)
            kind = nonneg_forall(p, ['x']).kind
            self.assertEqual(nonneg_forall(p.scale(Fraction(7, 3)), ['x']).kind, kind)
            if not p.is_zero():
                shifted = substitute(p, 'x', x + Fraction(1, 2))
                self.assertEqual(nonneg_forall(shifted, ['x']).kind, kind)

    def test_even_substitution(self):
        p = P('x**2 - 3*x + 2')
        x = MultiPoly.variable('x')
        self.assertTrue(nonneg_forall(substitute(p, 'x', x * x), ['x']).failed)
        q = P('x**2 - 2*x + 1')
        self.assertTrue(nonneg_forall(substitute(q, 'x', x * x), ['x']).holds)
        for a in range(0, 5):
            self.assertGreaterEqual(eval_at(q, {'x': a}), 0)


class TestEndpointAndMonotonicity(unittest.TestCase):

    def test_endpoint_test(self):
        F = P('x**2 - k', ['k', 'x'])
        self.assertTrue(endpoint_test(F, 'k', 0, ['x']).holds)
        verdict = endpoint_test(F, 'k', Fraction(1, 4), ['x'])
        self.assertTrue(verdict.failed)
        self.assertLess(eval_at(F, {'k': Fraction(1, 4), **verdict.witness}), 0)

    def test_monotonicity(self):
        cls, caveats = monotonicity_class(P('x**2 - k', ['k', 'x']), 'k', ['x'])
        self.assertEqual(cls, MonotonicityClass.DECREASING)
        self.assertEqual(caveats, [])
        cls, _ = monotonicity_class(P('k*(x**2 + 1)', ['k', 'x']), 'k', ['x'])
        self.assertEqual(cls, MonotonicityClass.INCREASING)
        cls, _ = monotonicity_class(P('k*x', ['k', 'x']), 'k', ['x'])
        self.assertEqual(cls, MonotonicityClass.INDEFINITE)

    def test_monotonicity_of_non_affine_family(self):
        cls, caveats = monotonicity_class(P('x**2 + 1 - k**2', ['k', 'x']), 'k', ['x'])
        self.assertEqual(cls, MonotonicityClass.INDEFINITE)
        self.assertEqual(caveats, [])
        cls, _ = monotonicity_class(P('x**2 - k**3 - k', ['k', 'x']), 'k', ['x'])
        self.assertEqual(cls, MonotonicityClass.DECREASING)

    def test_monotonicity_needs_parameter(self):
        with self.assertRaises(UsageError):
            monotonicity_class(P('x**2'), 'k')


class TestSectionDecider(unittest.TestCase):

    def test_section_spec(self):
        with self.assertRaises(UsageError):
            SectionSpec('u', P('u + x'))
        self.assertEqual(SectionSpec('u', P('x**2')).side_equation(), P('u**2 - x**2'))

    def test_sqrt_nonnegative(self):
        decider = SectionDecider(SectionSpec('u', P('x**2 + 1')))
        self.assertTrue(decider.decide(P('u', ['x', 'u']), ['x', 'u']).holds)

    def test_nonnegative_branch(self):
        section = SectionSpec('u', P('x**4 + y**8'))
        self.assertTrue(nonneg_forall_section(P('u', ['x', 'y', 'u']), section, ['x', 'y']).holds)

    def test_touching_bound_holds(self):
        decider = SectionDecider(SectionSpec('u', P('x**2 + 1')), NO_SCREEN)
        self.assertTrue(decider.decide(P('u - 1', ['x', 'u']), ['x', 'u']).holds)

    def test_absolute_value_fails(self):
        decider = SectionDecider(SectionSpec('u', P('x**2')), NO_SCREEN)
        g = P('u - 2', ['x', 'u'])
        verdict = decider.decide(g, ['x', 'u'])
        self.assertTrue(verdict.failed)
        self.assertEqual(decider.section_sign(g, verdict.witness), -1)

    def test_section_sign(self):
        decider = SectionDecider(SectionSpec('u', P('x**2 + 1')))
        g = P('u - x', ['x', 'u'])
        self.assertEqual(decider.section_sign(g, {'x': Fraction(3)}), 1)
        self.assertEqual(decider.section_sign(P('u**2 - x**2 - 1', ['x', 'u']), {'x': Fraction(2)}), 0)

    def test_aux_free_polynomial_delegated(self):
        decider = SectionDecider(SectionSpec('u', P('x**2 + 1')))
        self.assertTrue(decider.decide(P('x**2'), ['x', 'u']).holds)

    def test_negative_radicand_rejected(self):
        decider = SectionDecider(SectionSpec('u', P('-x**2 - 1')))
        with self.assertRaises(UsageError):
            decider.decide(P('u', ['x', 'u']), ['x', 'u'])


if __name__ == '__main__':
    unittest.main()
