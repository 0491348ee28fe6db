import os
import sys
import unittest

import numpy as np
from numpy.testing import assert_allclose

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../../src'))

from common.errors import ConstructionError
from common.errors import DimensionMismatchError
from common.errors import NonFiniteIterateError
from common.errors import StoppingRuleError
from linop import build_fredholm
from linop import diagonal
from linop import from_matrix
from linop import identity
from penalty import make_elastic_net
from penalty import make_entropy_simplex
from penalty import make_projected_quadratic
from penalty import make_quadratic
from penalty import nonneg_orthant
from solver import AccelState
from solver import DualGradientSolver
from solver import StoppingRule
from solver import Termination
from solver import a_priori_iterations
from solver import accelerated_solve
from solver import check_step_size
from solver import default_step_size
from solver import discrepancy_met
from solver import dual_gradient_solve
from solver import dual_objective
from solver import entropic_landweber_solve
from solver import lipschitz_constant
from solver import primal_form_solve
from solver.dual_gradient import PROGRESS_EVERY


class TestStoppingRules(unittest.TestCase):
    """Unit tests for stopping rules and step-size hypotheses"""

    def test_discrepancy_met(self):
        self.assertTrue(discrepancy_met(0.1, 1.5, 0.1))
        self.assertFalse(discrepancy_met(0.2, 1.5, 0.1))
        self.assertTrue(discrepancy_met(0.0, 1.5, 0.0))
        with self.assertRaises(StoppingRuleError):
            discrepancy_met(0.1, 1.0, 0.1)

    def test_a_priori_iterations(self):
        self.assertEqual(a_priori_iterations(0.01, q=1.0), 100)
        self.assertEqual(a_priori_iterations(1e-4, accelerated=True), 100)
        self.assertEqual(a_priori_iterations(1e-4, q=0.5, scale=1.0), 1000000)
        self.assertEqual(a_priori_iterations(0.25, q=0.5), 8)
        self.assertEqual(a_priori_iterations(1.0 / 64, q=1.0), 64)
        with self.assertRaises(StoppingRuleError):
            a_priori_iterations(0.0)
        with self.assertRaises(StoppingRuleError):
            a_priori_iterations(0.1, q=1.5)

    def test_invalid_rules(self):
        with self.assertRaises(StoppingRuleError):
            StoppingRule.discrepancy(tau=1.0, delta=0.1)
        with self.assertRaises(StoppingRuleError):
            StoppingRule.discrepancy(tau=1.5, delta=-0.1)
        with self.assertRaises(StoppingRuleError):
            StoppingRule.a_priori(-1)

    def test_default_step_size(self):
        self.assertAlmostEqual(default_step_size(2.0, StoppingRule.a_priori(10)), 0.5)
        stop = StoppingRule.discrepancy(tau=2.0, delta=0.1)
        self.assertAlmostEqual(default_step_size(1.0, stop), 0.375)
        entropic = StoppingRule.discrepancy(tau=3.0, delta=0.1)
        self.assertAlmostEqual(default_step_size(1.0, entropic, entropic=True), 1.0 / 6.0)
        with self.assertRaises(StoppingRuleError):
            default_step_size(1.0, stop, entropic=True)

    def test_check_step_size(self):
        check_step_size(1.0, 1.0, StoppingRule.a_priori(5))
        with self.assertRaises(StoppingRuleError):
            check_step_size(1.1, 1.0, StoppingRule.a_priori(5))
        with self.assertRaises(StoppingRuleError):
            check_step_size(0.5, 1.0, StoppingRule.discrepancy(tau=1.5, delta=0.1))
        check_step_size(0.2, 1.0, StoppingRule.discrepancy(tau=1.5, delta=0.1))
        with self.assertRaises(StoppingRuleError):
            check_step_size(0.0, 1.0, StoppingRule.a_priori(5))

    def test_lipschitz_constant_uses_penalty_norm(self):
        op = diagonal([2.0, 1.0])
        self.assertAlmostEqual(lipschitz_constant(op, make_quadratic(), op_norm=2.0), (1.05 * 2.0) ** 2)
        self.assertAlmostEqual(lipschitz_constant(op, make_entropy_simplex(np.ones(2))), (1.05 * 2.0) ** 2)
        self.assertAlmostEqual(lipschitz_constant(op, make_elastic_net(2.0, 0.5), op_norm=2.0), (1.05 * 2.0) ** 2 / 2)


class TestDualGradient(unittest.TestCase):
    """Unit tests for the plain and primal-form dual gradient iterations"""

    def test_identity_single_step(self):
        """Test that gamma = 1 on the identity recovers the data in one step"""
        y = np.array([2.0, 3.0])
        record = dual_gradient_solve(identity(2), y, make_quadratic(), 1.0, StoppingRule.a_priori(1), lipschitz=1.0)
        assert_allclose(record.iterates[0].x, [0.0, 0.0])
        assert_allclose(record.iterates[1].lam, y)
        assert_allclose(record.x_stop, y)
        self.assertEqual(record.residual_at_stop, 0.0)
        self.assertIs(record.termination, Termination.A_PRIORI_REACHED)

    def test_diagonal_two_steps(self):
        record = dual_gradient_solve(diagonal([1.0, 0.1]), np.array([1.0, 0.1]), make_quadratic(), 1.0,
                                     StoppingRule.a_priori(2), lipschitz=1.0)
        assert_allclose(record.iterates[2].x, [1.0, 0.0199], rtol=1e-12)
        self.assertEqual(record.stop_index, 2)
        self.assertEqual(len(record.residuals), 3)

    def test_quadratic_matches_classical_landweber(self):
        rng = np.random.default_rng(4)
        matrix = rng.standard_normal((12, 9))
        op = from_matrix(matrix)
        y = rng.standard_normal(12)
        record = dual_gradient_solve(op, y, make_quadratic(), None, StoppingRule.a_priori(100))
        x = np.zeros(9)
        for iterate in record.iterates:
            assert_allclose(iterate.x, x, rtol=1e-10, atol=1e-12)
            x = x - record.gamma * matrix.T @ (matrix @ x - y)

    def test_primal_form_agrees(self):
        rng = np.random.default_rng(8)
        op = from_matrix(rng.standard_normal((20, 20)))
        y = rng.standard_normal(20)
        for p in (make_quadratic(), make_elastic_net(1.0, 0.2), make_projected_quadratic(nonneg_orthant())):
            stop = StoppingRule.a_priori(50)
            dual = dual_gradient_solve(op, y, p, None, stop)
            primal = primal_form_solve(op, y, p, None, stop)
            for a, b in zip(dual.iterates, primal.iterates):
                self.assertLessEqual(float(np.max(np.abs(a.x - b.x))), 1e-10)

    def test_entropy_iterates_are_densities(self):
        rng = np.random.default_rng(6)
        weights = np.full(6, 1.0 / 6)
        op = from_matrix(rng.standard_normal((6, 6)), domain_weights=weights)
        record = dual_gradient_solve(op, rng.standard_normal(6), make_entropy_simplex(weights), None,
                                     StoppingRule.a_priori(50))
        for iterate in record.iterates:
            self.assertTrue(np.all(iterate.x >= 0))
            self.assertAlmostEqual(float(np.dot(weights, iterate.x)), 1.0, places=12)

    def test_discrepancy_stops_at_first_index(self):
        rng = np.random.default_rng(1)
        op = diagonal(1.0 / np.arange(1, 21))
        y = op.apply(rng.standard_normal(20)) + 0.01 * rng.standard_normal(20)
        delta = 0.01 * np.sqrt(20)
        record = dual_gradient_solve(op, y, make_quadratic(), None, StoppingRule.discrepancy(1.5, delta))
        self.assertIs(record.termination, Termination.DISCREPANCY_MET)
        self.assertLessEqual(record.residual_at_stop, 1.5 * delta)
        self.assertTrue(np.all(record.residuals[:record.stop_index] > 1.5 * delta))

    def test_cap_hit(self):
        record = dual_gradient_solve(identity(3), np.ones(3), make_quadratic(), None,
                                     StoppingRule.discrepancy(1.5, 0.0, n_cap=5))
        self.assertIs(record.termination, Termination.CAP_HIT)
        self.assertEqual(record.stop_index, 5)

    def test_record_every_keeps_stopping_iterate(self):
        record = dual_gradient_solve(identity(2), np.ones(2), make_quadratic(), None,
                                     StoppingRule.a_priori(7), record_every=3)
        self.assertEqual([it.n for it in record.iterates], [0, 3, 6, 7])
        self.assertEqual(len(record.residuals), 8)

    def test_progress_is_logged_at_debug(self):
        with self.assertLogs('solver.dual_gradient', level='DEBUG') as logs:
            dual_gradient_solve(identity(2), np.ones(2), make_quadratic(), None,
                                StoppingRule.a_priori(2 * PROGRESS_EVERY), record_every=PROGRESS_EVERY)
        progress = [line for line in logs.output if line.startswith('DEBUG') and 'residual=' in line]
        self.assertEqual(len(progress), 2)
        self.assertIn(f"n={PROGRESS_EVERY}:", progress[0])

    def test_lambda0_sets_first_iterate(self):
        lam0 = np.array([0.5, -1.0])
        record = dual_gradient_solve(diagonal([2.0, 1.0]), np.ones(2), make_projected_quadratic(nonneg_orthant()),
                                     None, StoppingRule.a_priori(1), lambda0=lam0)
        assert_allclose(record.iterates[0].x, [1.0, 0.0])

    def test_step_size_violation(self):
        stop = StoppingRule.a_priori(3)
        with self.assertRaises(StoppingRuleError):
            dual_gradient_solve(identity(2), np.ones(2), make_quadratic(), 1.9, stop, lipschitz=1.0)
        record = dual_gradient_solve(identity(2), np.ones(2), make_quadratic(), 1.9, stop,
                                     allow_unproven=True, lipschitz=1.0)
        self.assertTrue(record.experimental)

    def test_non_finite_iterate(self):
        with self.assertRaises(NonFiniteIterateError):
            dual_gradient_solve(identity(2), np.ones(2), make_quadratic(), 1e200, StoppingRule.a_priori(10),
                                allow_unproven=True)

    def test_mismatched_inputs(self):
        op = build_fredholm(lambda s, t: s * t, 8)
        with self.assertRaises(ConstructionError):
            DualGradientSolver(op, make_quadratic())
        with self.assertRaises(DimensionMismatchError):
            dual_gradient_solve(identity(2), np.ones(3), make_quadratic(), None, StoppingRule.a_priori(1))

    def test_dual_objective(self):
        self.assertEqual(dual_objective(make_quadratic(), identity(2), np.zeros(2), np.ones(2)), 0.0)
        entropy = make_entropy_simplex(np.ones(5))
        self.assertAlmostEqual(dual_objective(entropy, identity(5), np.zeros(5), np.ones(5)), np.log(5.0))


class TestAccelerated(unittest.TestCase):
    """Unit tests for the Nesterov-accelerated iteration"""

    def test_accel_state(self):
        state = AccelState(lambda_prev=np.zeros(1), lam=np.zeros(1), alpha=2.0)
        self.assertEqual(state.t(1), 1.0)
        self.assertEqual(state.t(5), 3.0)
        self.assertEqual(state.extrapolation_weight(1), 0.0)

    def test_first_step_matches_plain(self):
        rng = np.random.default_rng(2)
        op = from_matrix(rng.standard_normal((8, 8)))
        y = rng.standard_normal(8)
        p = make_quadratic()
        plain = dual_gradient_solve(op, y, p, None, StoppingRule.a_priori(1))
        accel = accelerated_solve(op, y, p, None, 3.0, StoppingRule.a_priori(1))
        assert_allclose(accel.x_stop, plain.x_stop, rtol=1e-12, atol=1e-14)

    def test_extrapolated_points(self):
        """Test that each stored lambda_hat extrapolates the two previous multipliers"""
        rng = np.random.default_rng(3)
        op = from_matrix(rng.standard_normal((6, 6)))
        alpha = 3.0
        record = accelerated_solve(op, rng.standard_normal(6), make_quadratic(), None, alpha,
                                   StoppingRule.a_priori(10))
        its = record.iterates
        assert_allclose(its[1].hat_lambda, its[0].lam)
        for k in range(2, len(its)):
            weight = (k - 2.0) / (k - 1.0 + alpha)
            expected = its[k - 1].lam + weight * (its[k - 1].lam - its[k - 2].lam)
            assert_allclose(its[k].hat_lambda, expected, rtol=1e-12, atol=1e-14)

    def test_projected_iterates_stay_nonnegative(self):
        rng = np.random.default_rng(12)
        op = from_matrix(rng.standard_normal((10, 10)))
        record = accelerated_solve(op, rng.standard_normal(10), make_projected_quadratic(nonneg_orthant()), None,
                                   3.0, StoppingRule.a_priori(60))
        self.assertEqual(len(record.iterates), 61)
        for iterate in record.iterates:
            self.assertTrue(np.all(iterate.x >= 0))
            if iterate.hat_x is not None:
                self.assertTrue(np.all(iterate.hat_x >= 0))

    def test_entropy_iterates_are_densities(self):
        rng = np.random.default_rng(13)
        weights = np.full(8, 1.0 / 8)
        op = from_matrix(rng.standard_normal((8, 8)), domain_weights=weights)
        record = accelerated_solve(op, rng.standard_normal(8), make_entropy_simplex(weights), None, 3.0,
                                   StoppingRule.a_priori(60))
        for iterate in record.iterates:
            self.assertTrue(np.all(iterate.x >= 0))
            self.assertAlmostEqual(float(np.dot(weights, iterate.x)), 1.0, places=12)

    def test_iterates_follow_the_dual_map(self):
        """Test x_n = grad R*(A* lambda_n) for every stored accelerated iterate"""
        rng = np.random.default_rng(14)
        op = from_matrix(rng.standard_normal((12, 12)))
        y = rng.standard_normal(12)
        penalties = (make_quadratic(), make_elastic_net(1.0, 0.2), make_projected_quadratic(nonneg_orthant()),
                     make_entropy_simplex(np.ones(12)))
        for p in penalties:
            record = accelerated_solve(op, y, p, None, 3.0, StoppingRule.a_priori(200), record_every=7)
            self.assertGreater(len(record.iterates), 25)
            for iterate in record.iterates:
                assert_allclose(iterate.x, p.conjugate_grad(op.apply_adjoint(iterate.lam)), rtol=1e-9, atol=1e-9,
                                err_msg=repr(p))

    def test_rejects_small_alpha(self):
        with self.assertRaises(StoppingRuleError):
            accelerated_solve(identity(2), np.ones(2), make_quadratic(), None, 1.5, StoppingRule.a_priori(2))

    def test_discrepancy_is_experimental(self):
        record = accelerated_solve(identity(2), np.ones(2), make_quadratic(), None, 3.0,
                                   StoppingRule.discrepancy(1.5, 0.01))
        self.assertTrue(record.experimental)


class TestEntropicLandweber(unittest.TestCase):
    """Unit tests for the multiplicative entropic Landweber baseline"""

    def test_fixed_point_on_exact_data(self):
        op = build_fredholm(lambda s, t: np.exp(-(s - t) ** 2), 10)
        x0 = np.ones(10)
        record = entropic_landweber_solve(op, op.apply(x0), None, StoppingRule.a_priori(1))
        assert_allclose(record.x_stop, x0, atol=1e-12)
        self.assertIsNone(record.final.lam)
        self.assertTrue(np.isnan(record.dual_values[0]))

    def test_mass_moves_towards_data(self):
        record = entropic_landweber_solve(identity(2), np.array([1.0, 0.0]), 0.5, StoppingRule.a_priori(1))
        self.assertGreater(record.x_stop[0], 0.5)

    def test_unweighted_operator(self):
        """Operators without quadrature weights run on the unit-weight simplex"""
        rng = np.random.default_rng(21)
        op = from_matrix(rng.standard_normal((4, 4)))
        y = rng.standard_normal(4)
        record = entropic_landweber_solve(op, y, None, StoppingRule.a_priori(5))
        self.assertEqual(record.stop_index, 5)
        for iterate in record.iterates:
            self.assertAlmostEqual(float(np.sum(iterate.x)), 1.0, places=12)

        record = dual_gradient_solve(op, y, make_entropy_simplex(np.ones(4)), None, StoppingRule.a_priori(5))
        self.assertEqual(record.stop_index, 5)
        for iterate in record.iterates:
            self.assertTrue(np.all(iterate.x >= 0))
            self.assertAlmostEqual(float(np.sum(iterate.x)), 1.0, places=12)

    def test_iterates_are_densities(self):
        rng = np.random.default_rng(9)
        weights = np.full(8, 1.0 / 8)
        op = from_matrix(np.abs(rng.standard_normal((8, 8))), domain_weights=weights)
        record = entropic_landweber_solve(op, rng.uniform(size=8), None, StoppingRule.a_priori(40))
        for iterate in record.iterates:
            self.assertTrue(np.all(iterate.x >= 0))
            self.assertAlmostEqual(float(np.dot(weights, iterate.x)), 1.0, places=12)


if __name__ == '__main__':
    unittest.main()
