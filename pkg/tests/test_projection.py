import unittest
import sys
import os

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.algebra.polyring import MultiPoly, canonical, equal_up_to_constant
from src.algebra.projection import (
    decider_projection,
    project_step,
    radical_eliminate,
    successive_projection,
)
from src.errors import ProjectionCollapseError, UsageError


def P(text, variables=None):
    return MultiPoly.from_expr(text, variables)


class TestProjectStep(unittest.TestCase):

    def test_even_quadratic(self):
        self.assertEqual(project_step(P('x**2 - k', ['k', 'x']), 'x', ['k']), P('k'))

    def test_shifted_quadratic(self):
        result = project_step(P('x**2 - 2*k*x + 1', ['k', 'x']), 'x', ['k'])
        self.assertTrue(equal_up_to_constant(result, P('k**2 - 1')))

    def test_absent_variable(self):
        with self.assertRaises(UsageError):
            project_step(P('k + 1'), 'x', ['k'])

    def test_nothing_left_in_kept_variables(self):
        with self.assertRaises(ProjectionCollapseError):
            project_step(P('x**2 + y**2 + 1', ['k', 'x', 'y']), 'x', ['k'])


class TestSuccessiveProjection(unittest.TestCase):

    def test_two_variables(self):
        trace = successive_projection(P('x**2 + y**2 - k', ['k', 'x', 'y']), ['x', 'y'], 'k')
        self.assertEqual(trace.final, P('k'))
        self.assertEqual([step.variable for step in trace.steps], ['x', 'y'])
        self.assertTrue(any('even in x' in note for note in trace.steps[0].notes))

    def test_homogeneous_reduction(self):
        trace = successive_projection(P('x**2 - k*y**2', ['k', 'x', 'y']), ['x', 'y'], 'k')
        self.assertEqual(trace.final, P('k'))
        self.assertTrue(any('homogeneous' in note for note in trace.notes))

    def test_without_reductions_same_candidates(self):
        p = P('x**4 - 2*k*x**2 + y**2 + 1', ['k', 'x', 'y'])
        fast = successive_projection(p, ['x', 'y'], 'k')
        plain = successive_projection(p, ['x', 'y'], 'k', reductions=False)
        self.assertEqual(fast.final, canonical(P('k**2 - 1')))
        self.assertEqual(plain.final, fast.final)

    def test_skips_absent_variable(self):
        trace = successive_projection(P('x**2 - k', ['k', 'x', 'y']), ['y', 'x'], 'k')
        self.assertEqual(trace.final, P('k'))
        self.assertEqual(len(trace.steps), 1)

    def test_order_must_cover_variables(self):
        with self.assertRaises(UsageError):
            successive_projection(P('x*y - k', ['k', 'x', 'y']), ['x'], 'k')
        with self.assertRaises(UsageError):
            successive_projection(P('x**2 + 1'), ['x'], 'k')

    def test_trace_serializes(self):
        trace = successive_projection(P('x**2 - 2*k*x + 1', ['k', 'x']), ['x'], 'k')
        data = trace.to_dict()
        self.assertEqual(data['param'], 'k')
        self.assertEqual(data['steps'][0]['variable'], 'x')


class TestRadicalEliminate(unittest.TestCase):

    def test_absolute_value_section(self):
        u = P('u', ['u', 'x'])
        h = P('u**2 - x**2', ['u', 'x'])
        self.assertEqual(radical_eliminate(u, [('u', h)], 'x'), P('x'))

    def test_keeps_parameter_factors(self):
        p = P('u - k', ['k', 'u', 'x'])
        h = P('u**2 - x**2 - 1', ['u', 'x'])
        result = radical_eliminate(p, [('u', h)], 'k')
        self.assertTrue(equal_up_to_constant(result, P('k**2 - x**2 - 1')))

    def test_absent_aux_is_skipped(self):
        p = P('x**2 - k', ['k', 'x'])
        self.assertEqual(radical_eliminate(p, [('u', P('u**2 - x', ['u', 'x']))], 'k'), p)


class TestDeciderProjection(unittest.TestCase):

    def test_circle(self):
        result = decider_projection([P('x**2 + y**2 - 1', ['x', 'y'])], 'y', ['x'])
        self.assertEqual(result, [canonical(P('x**2 - 1'))])

    def test_pairwise_resultant(self):
        result = decider_projection([P('y - x', ['x', 'y']), P('y + x', ['x', 'y'])], 'y', ['x'])
        self.assertEqual(result, [P('x')])

    def test_leading_coefficient_included(self):
        result = decider_projection([P('x*y**2 + y + 1', ['x', 'y'])], 'y', ['x'])
        self.assertIn(P('x'), result)
        self.assertTrue(any(equal_up_to_constant(q, P('x*(4*x - 1)')) for q in result))

    def test_passthrough_and_constants(self):
        result = decider_projection([P('x**2 - 2', ['x', 'y']), MultiPoly.constant(3)], 'y', ['x'])
        self.assertEqual(result, [canonical(P('x**2 - 2'))])

    def test_repeated_factor_collapses(self):
        with self.assertRaises(ProjectionCollapseError):
            decider_projection([P('(y - x)**2', ['x', 'y'])], 'y', ['x'])


if __name__ == '__main__':
    unittest.main()
