import os
import sys
import unittest

import numpy as np
from numpy.testing import assert_allclose

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../../src'))

from analysis import Measure
from analysis import RatePoint
from analysis import SourceKind
from analysis import SourceSpec
from analysis import apriori_eta_constant
from analysis import construct_projected_power_solution
from analysis import construct_source_solution
from analysis import discrepancy_lower_bound
from analysis import error_measure
from analysis import eta_oracle
from analysis import fit_rate
from analysis import fit_rate_study
from analysis import fractional_power
from analysis import is_certified
from analysis import kl_l1_bound_check
from analysis import loglog_slope
from analysis import median_points
from analysis import projected_source_constant
from analysis import projected_source_parameters
from analysis import variational_sc_margin
from common.errors import ConstructionError
from linop import build_fredholm
from linop import diagonal
from linop import from_matrix
from penalty import make_elastic_net
from penalty import make_entropy_simplex
from penalty import make_projected_quadratic
from penalty import make_quadratic
from penalty import nonneg_orthant
from penalty import whole_space


class TestSourceConditions(unittest.TestCase):
    """Unit tests for exact solutions built from source conditions"""

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.op = diagonal(1.0 / np.arange(1, 11))
        self.lam = self.rng.standard_normal(10)

    def test_dual_element_solutions(self):
        x = construct_source_solution(self.op, make_quadratic(), self.lam)
        assert_allclose(x, self.op.apply_adjoint(self.lam))
        p = make_projected_quadratic(nonneg_orthant())
        x = construct_source_solution(self.op, p, self.lam)
        assert_allclose(x, np.maximum(self.op.apply_adjoint(self.lam), 0.0))
        self.assertTrue(is_certified(self.op, p, x, self.lam))

    def test_entropic_solution_is_certified(self):
        weights = np.full(10, 0.1)
        op = from_matrix(self.rng.standard_normal((10, 10)), domain_weights=weights)
        p = make_entropy_simplex(weights)
        x = construct_source_solution(op, p, self.lam)
        self.assertTrue(is_certified(op, p, x, self.lam))
        # 1 + log x - A* lambda is constant on the simplex
        spread = 1.0 + np.log(x) - op.apply_adjoint(self.lam)
        self.assertLess(float(np.ptp(spread)), 1e-10)

    def test_certificate_rejects_wrong_solution(self):
        x = construct_source_solution(self.op, make_quadratic(), self.lam)
        self.assertFalse(is_certified(self.op, make_quadratic(), x + 0.1, self.lam))

    def test_projected_power_examples(self):
        op = diagonal([3.0, 1.0])
        omega = np.array([1.0, 1.0])
        assert_allclose(construct_projected_power_solution(op, 1.0, omega, whole_space()), [3.0, 1.0])
        assert_allclose(construct_projected_power_solution(op, 0.5, omega, whole_space()), [np.sqrt(3.0), 1.0])
        assert_allclose(construct_projected_power_solution(op, 1.0, np.array([1.0, -1.0]), nonneg_orthant()),
                        [3.0, 0.0])
        with self.assertRaises(ConstructionError):
            construct_projected_power_solution(op, 1.5, omega, whole_space())

    def test_fractional_power_respects_weights(self):
        """Test that (A*A)^{2/2} equals A* applied after A on a weighted domain"""
        op = build_fredholm(lambda s, t: np.exp(-(s - t) ** 2) * (1 + s), 20, 'trapezoid')
        omega = self.rng.standard_normal(20)
        assert_allclose(fractional_power(op, 2.0, omega), op.apply_adjoint(op.apply(omega)), rtol=1e-8, atol=1e-12)

    def test_projected_source_constant(self):
        self.assertAlmostEqual(projected_source_constant(1.0), 1.0)
        self.assertAlmostEqual(projected_source_constant(0.5), 0.75)
        m, q = projected_source_parameters(1.0, 2.0)
        self.assertAlmostEqual(m, 2.0)
        self.assertAlmostEqual(q, 1.0)

    def test_source_spec_round_trip(self):
        spec = SourceSpec(SourceKind.PROJECTED_POWER, nu=0.5, omega=np.array([1.0, 2.0]))
        restored = SourceSpec.from_dict(spec.to_dict())
        self.assertIs(restored.kind, SourceKind.PROJECTED_POWER)
        assert_allclose(restored.omega, [1.0, 2.0])
        self.assertIsNone(restored.lambda_dagger)


class TestVariationalInequality(unittest.TestCase):
    """Unit tests for the sampled variational source inequality"""

    def test_quadratic_dual_element(self):
        rng = np.random.default_rng(1)
        op = from_matrix(rng.standard_normal((8, 8)))
        lam = rng.standard_normal(8)
        p = make_quadratic()
        xdagger = construct_source_solution(op, p, lam)
        report = variational_sc_margin(op, p, xdagger, float(np.linalg.norm(lam)), 1.0, samples=200, seed=2,
                                       xi_dagger=op.apply_adjoint(lam))
        self.assertTrue(report.passed)
        self.assertLessEqual(abs(report.min_slack), 1e-8)

    def test_projected_power_source(self):
        rng = np.random.default_rng(3)
        op = diagonal(1.0 / np.arange(1, 9))
        omega = rng.standard_normal(8)
        xdagger = construct_projected_power_solution(op, 1.0, omega, nonneg_orthant())
        m, q = projected_source_parameters(1.0, float(np.linalg.norm(omega)))
        report = variational_sc_margin(op, make_projected_quadratic(nonneg_orthant()), xdagger, m, q,
                                       samples=200, seed=4)
        self.assertTrue(report.passed)

    def test_bregman_needs_subgradient(self):
        with self.assertRaises(ValueError):
            variational_sc_margin(diagonal([1.0]), make_quadratic(), np.zeros(1), 1.0, 1.0, samples=5, seed=0)


class TestErrorMeasures(unittest.TestCase):
    """Unit tests for error measures"""

    def test_norms(self):
        p = make_quadratic(np.array([0.5, 2.0]))
        x, xref = np.array([1.0, 1.0]), np.array([0.0, 0.0])
        self.assertAlmostEqual(error_measure('norm', p, x, xref), np.sqrt(2.5))
        self.assertAlmostEqual(error_measure(Measure.NORM_SQ_HALF, p, x, xref), 1.25)
        self.assertAlmostEqual(error_measure('l1', p, x, xref), 2.5)
        self.assertEqual(error_measure('norm', p, x, x), 0.0)

    def test_bregman_of_quadratic(self):
        p = make_quadratic()
        x, xref = np.array([1.0, 2.0]), np.array([0.0, 1.0])
        self.assertAlmostEqual(error_measure('bregman', p, x, xref, xref), 1.0)
        with self.assertRaises(ValueError):
            error_measure('bregman', p, x, xref)

    def test_kl(self):
        p = make_entropy_simplex(np.ones(2))
        self.assertAlmostEqual(error_measure('kl', p, np.array([0.5, 0.5]), np.array([0.25, 0.75])), 0.14384,
                               places=5)
        with self.assertLogs('analysis.measures', level='WARNING'):
            value = error_measure('kl', p, np.array([0.5, 0.5]), np.array([1.0, 0.0]))
        self.assertEqual(value, float('inf'))

    def test_kl_l1_bound(self):
        report = kl_l1_bound_check(np.array([0.1, 0.2, 0.3, 0.4]), samples=500, seed=0)
        self.assertTrue(report.passed)


class TestEta(unittest.TestCase):
    """Unit tests for the eta_n oracle"""

    def setUp(self):
        rng = np.random.default_rng(5)
        self.op = diagonal(1.0 / np.arange(1, 11))
        self.lam = rng.standard_normal(10)
        self.xdagger = self.op.apply_adjoint(self.lam)
        self.y = self.op.apply(self.xdagger)

    def test_quadratic_is_exact_and_decreasing(self):
        values = [eta_oracle(n, 0.5, 1.0 / 3.0, self.op, self.y, make_quadratic(), self.xdagger).value
                  for n in (0, 5, 50, 500)]
        self.assertTrue(all(v >= 0 for v in values))
        self.assertTrue(all(a >= b for a, b in zip(values, values[1:])))

    def test_quadratic_a_priori_bound(self):
        """Test eta_n <= c_1 / (n + 1) for a dual-element source"""
        gamma = 0.5
        c1 = apriori_eta_constant(float(np.linalg.norm(self.lam)), 1.0, gamma)
        for n in (0, 10, 100, 1000):
            estimate = eta_oracle(n, gamma, 1.0 / 3.0, self.op, self.y, make_quadratic(), self.xdagger)
            self.assertTrue(estimate.exact)
            self.assertLessEqual(estimate.value, c1 / (n + 1))

    def test_iterative_matches_closed_form(self):
        exact = eta_oracle(10, 0.5, 1.0 / 3.0, self.op, self.y, make_quadratic(), self.xdagger)
        iterative = eta_oracle(10, 0.5, 1.0 / 3.0, self.op, self.y, make_elastic_net(1.0, 0.0), self.xdagger)
        self.assertTrue(iterative.converged)
        self.assertFalse(iterative.exact)
        self.assertAlmostEqual(iterative.value, exact.value, delta=1e-7)

    def test_entropy_bracket(self):
        rng = np.random.default_rng(6)
        weights = np.full(10, 0.1)
        op = from_matrix(rng.standard_normal((10, 10)) / 4, domain_weights=weights)
        p = make_entropy_simplex(weights)
        xdagger = construct_source_solution(op, p, rng.standard_normal(10))
        estimate = eta_oracle(5, 0.5, 0.5, op, op.apply(xdagger), p, xdagger)
        self.assertTrue(estimate.converged)
        self.assertGreaterEqual(estimate.value, 0.0)
        self.assertLessEqual(estimate.value, estimate.upper + 1e-12)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(ValueError):
            eta_oracle(-1, 0.5, 0.5, self.op, self.y, make_quadratic(), self.xdagger)

    def test_constants(self):
        self.assertAlmostEqual(discrepancy_lower_bound(9, 0.1, 0.2, 2.0, 1.0), 0.022)
        self.assertAlmostEqual(apriori_eta_constant(2.0, 1.0, 0.5), 6.0)


class TestRates(unittest.TestCase):
    """Unit tests for convergence-rate fits"""

    deltas = 10.0 ** -np.arange(1.0, 5.5, 0.5)

    def points(self, errors):
        return [RatePoint(d, e, 10, Measure.NORM) for d, e in zip(self.deltas, errors)]

    def test_exact_power_law(self):
        fit = fit_rate(self.points(self.deltas ** 0.5))
        self.assertAlmostEqual(fit.slope, 0.5, places=12)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=12)
        scaled = fit_rate(self.points(3.0 * self.deltas))
        self.assertAlmostEqual(scaled.slope, 1.0, places=12)
        self.assertAlmostEqual(scaled.intercept, np.log(3.0), places=12)

    def test_jittered_power_law(self):
        rng = np.random.default_rng(7)
        errors = self.deltas ** 0.5 * (1.0 + 0.05 * rng.uniform(-1, 1, self.deltas.size))
        fit = fit_rate(self.points(errors))
        self.assertGreaterEqual(fit.slope, 0.45)
        self.assertLessEqual(fit.slope, 0.55)

    def test_nonpositive_points_are_excluded(self):
        errors = self.deltas ** 0.5
        errors[2] = 0.0
        with self.assertLogs('analysis.rates', level='WARNING'):
            fit = fit_rate(self.points(errors))
        self.assertEqual(fit.n_points, self.deltas.size - 1)

    def test_too_few_points(self):
        with self.assertRaises(ValueError):
            fit_rate(self.points([0.1, 0.01]))

    def test_drop_largest_delta(self):
        deltas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
        errors = [10 * np.sqrt(1e-1)] + [np.sqrt(d) for d in deltas[1:]]
        points = [RatePoint(d, e, 1, Measure.NORM) for d, e in zip(deltas, errors)]
        fit = fit_rate_study(points)
        self.assertTrue(fit.dropped_largest)
        self.assertAlmostEqual(fit.slope, 0.5, places=10)
        self.assertLess(fit.full_fit.r_squared, 0.95)

    def test_keeps_clean_fit(self):
        fit = fit_rate_study(self.points(self.deltas ** 0.5))
        self.assertFalse(fit.dropped_largest)
        self.assertIsNone(fit.full_fit)

    def test_median_points(self):
        points = [RatePoint(0.1, e, n, Measure.L1) for e, n in ((1.0, 10), (3.0, 30), (2.0, 20))]
        merged = median_points(points)
        self.assertEqual(len(merged), 1)
        self.assertEqual(merged[0].error, 2.0)
        self.assertEqual(merged[0].n_stop, 20)

    def test_loglog_slope(self):
        n = np.array([10.0, 100.0, 1000.0])
        self.assertAlmostEqual(loglog_slope(n, 1.0 / n), -1.0, places=12)


if __name__ == '__main__':
    unittest.main()
