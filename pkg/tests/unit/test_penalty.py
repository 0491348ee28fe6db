import itertools
import os
import sys
import unittest

import numpy as np
from numpy.testing import assert_allclose

# Add src directory to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../../src'))

from common.errors import ConstructionError
from common.errors import DomainError
from penalty import ConstraintKind
from penalty import PenaltyKind
from penalty import box
from penalty import bregman
from penalty import fenchel_young_residual
from penalty import lipschitz_check
from penalty import make_elastic_net
from penalty import make_entropy_simplex
from penalty import make_penalty
from penalty import make_projected_quadratic
from penalty import make_quadratic
from penalty import nonneg_orthant
from penalty import project_simplex
from penalty import simplex
from penalty import strong_convexity_check


def brute_force_simplex_projection(v):
    """Enumerate supports and keep the closest feasible candidate"""
    best, best_distance = None, np.inf
    n = v.size
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            idx = list(support)
            theta = (v[idx].sum() - 1.0) / size
            candidate = np.zeros(n)
            candidate[idx] = v[idx] - theta
            if np.any(candidate < -1e-15):
                continue
            distance = np.sum((candidate - v) ** 2)
            if distance < best_distance:
                best, best_distance = candidate, distance
    return best


def all_penalties():
    weights = np.full(6, 1.0 / 6)
    return [
        make_quadratic(),
        make_projected_quadratic(nonneg_orthant()),
        make_projected_quadratic(box(-0.5, 0.5)),
        make_projected_quadratic(simplex(), weights),
        make_elastic_net(0.7, 0.3),
        make_entropy_simplex(weights),
    ]


class TestConjugateGradients(unittest.TestCase):
    """Unit tests for grad R* of each penalty family"""

    def test_quadratic_is_identity(self):
        p = make_quadratic()
        assert_allclose(p.conjugate_grad(np.array([1.0, -2.0])), [1.0, -2.0])
        self.assertAlmostEqual(p.conjugate_value(np.array([3.0, 4.0])), 12.5)

    def test_projection_examples(self):
        assert_allclose(make_projected_quadratic(nonneg_orthant()).conjugate_grad(np.array([1.0, -2.0])), [1.0, 0.0])
        assert_allclose(make_projected_quadratic(box(0.0, 1.0)).conjugate_grad(np.array([2.0, 0.5])), [1.0, 0.5])
        p = make_projected_quadratic(simplex())
        assert_allclose(p.conjugate_grad(np.array([1.0, 0.0])), [1.0, 0.0])
        assert_allclose(p.conjugate_grad(np.array([1.0, 1.0])), [0.5, 0.5])

    def test_simplex_projection_against_enumeration(self):
        """Test the sort-based projection against enumerating all supports"""
        grid = [-1.0, 0.0, 0.5, 2.0]
        for dim in range(1, 5):
            for values in itertools.product(grid, repeat=dim):
                v = np.array(values)
                assert_allclose(project_simplex(v), brute_force_simplex_projection(v), atol=1e-12)

    def test_weighted_simplex_projection(self):
        """Test mass, idempotency and the variational inequality in the weighted norm"""
        rng = np.random.default_rng(5)
        weights = np.array([0.5, 0.25, 0.125, 0.125])
        for _ in range(50):
            v = rng.standard_normal(4) * 3
            x = project_simplex(v, 1.0, weights)
            self.assertTrue(np.all(x >= 0))
            self.assertAlmostEqual(float(np.dot(weights, x)), 1.0, places=12)
            assert_allclose(project_simplex(x, 1.0, weights), x, atol=1e-12)
            for z in rng.dirichlet(np.ones(4), size=10) / weights:
                self.assertLessEqual(float(np.dot(weights * (v - x), z - x)), 1e-12)

    def test_entropy_softmax(self):
        p = make_entropy_simplex(np.ones(4))
        assert_allclose(p.conjugate_grad(np.zeros(4)), np.full(4, 0.25))
        q = make_entropy_simplex(np.ones(2))
        assert_allclose(q.conjugate_grad(np.array([np.log(2.0), 0.0])), [2.0 / 3.0, 1.0 / 3.0])

    def test_entropy_extreme_input_stays_finite(self):
        """Test that huge dual entries do not overflow the softmax"""
        p = make_entropy_simplex(np.ones(4))
        x = p.conjugate_grad(np.array([0.0, 1e4, -1e4, 5e3]))
        self.assertTrue(np.all(np.isfinite(x)))
        self.assertTrue(np.all(x >= 0))
        self.assertAlmostEqual(float(x.sum()), 1.0, places=12)
        self.assertTrue(np.isfinite(p.conjugate_value(np.array([0.0, 1e4, -1e4, 5e3]))))

    def test_entropy_weighted_mass(self):
        rng = np.random.default_rng(2)
        weights = rng.uniform(0.1, 1.0, size=7)
        p = make_entropy_simplex(weights)
        for _ in range(20):
            x = p.conjugate_grad(rng.standard_normal(7) * 5)
            self.assertAlmostEqual(float(np.dot(weights, x)), 1.0, places=12)

    def test_elastic_net_soft_threshold(self):
        p = make_elastic_net(1.0, 1.0)
        assert_allclose(p.conjugate_grad(np.array([2.0, -0.5])), [1.0, 0.0])
        plain = make_elastic_net(1.0, 0.0)
        assert_allclose(plain.conjugate_grad(np.array([2.0, -0.5])), [2.0, -0.5])

    def test_fenchel_young_equality_on_image(self):
        """Test R(x) + R*(xi) = <xi, x> whenever x = grad R*(xi)"""
        rng = np.random.default_rng(11)
        for p in all_penalties():
            for _ in range(50):
                xi = rng.standard_normal(6) * 10.0 ** rng.uniform(-1, 1)
                x = p.conjugate_grad(xi)
                scale = max(1.0, abs(p.pairing(xi, x)))
                self.assertLessEqual(abs(fenchel_young_residual(p, x, xi)), 1e-8 * scale, msg=repr(p))


class TestBregman(unittest.TestCase):
    """Unit tests for Bregman distances"""

    def test_quadratic_examples(self):
        p = make_quadratic()
        self.assertAlmostEqual(bregman(p, np.array([1.0, 0.0]), np.zeros(2), np.zeros(2)), 0.5)
        x = np.array([0.3, -0.2])
        self.assertEqual(bregman(p, x, x, x), 0.0)

    def test_entropy_is_kullback_leibler(self):
        p = make_entropy_simplex(np.ones(2))
        x = np.array([0.25, 0.75])
        value = bregman(p, np.array([0.5, 0.5]), x, np.log(x))
        self.assertAlmostEqual(value, 0.14384, places=5)

    def test_rejects_non_subgradient(self):
        with self.assertRaises(DomainError):
            bregman(make_quadratic(), np.ones(2), np.zeros(2), np.ones(2))

    def test_outside_domain_is_infinite(self):
        p = make_projected_quadratic(nonneg_orthant())
        self.assertEqual(bregman(p, np.array([-1.0, 0.0]), np.zeros(2), np.zeros(2)), float('inf'))


class TestSampledChecks(unittest.TestCase):
    """Unit tests for the sampled strong convexity and Lipschitz checks"""

    def test_quadratic_ratio_is_one(self):
        report = strong_convexity_check(make_quadratic(), samples=200, seed=0)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.extreme_ratio, 1.0, places=8)

    def test_all_penalties_pass(self):
        for p in all_penalties():
            self.assertTrue(strong_convexity_check(p, samples=300, seed=1).passed, msg=repr(p))
            self.assertTrue(lipschitz_check(p, samples=300, seed=2).passed, msg=repr(p))

    def test_rejects_zero_samples(self):
        with self.assertRaises(ValueError):
            strong_convexity_check(make_quadratic(), samples=0, seed=0)


class TestMakePenalty(unittest.TestCase):
    """Unit tests for building penalties from names"""

    def test_build_by_kind(self):
        p = make_penalty('projected_quadratic', constraint='nonneg_orthant')
        self.assertIs(p.kind, PenaltyKind.PROJECTED_QUADRATIC)
        self.assertIs(p.constraint.kind, ConstraintKind.NONNEG_ORTHANT)
        q = make_penalty('elastic_net', alpha=2.0, beta=0.1)
        self.assertEqual(q.sigma, 1.0)
        self.assertIs(make_penalty('quadratic').kind, PenaltyKind.QUADRATIC)

    def test_invalid_construction(self):
        with self.assertRaises(ConstructionError):
            make_penalty('total_variation')
        with self.assertRaises(ConstructionError):
            make_penalty('entropy_simplex')
        with self.assertRaises(ConstructionError):
            make_elastic_net(0.0, 1.0)
        with self.assertRaises(ConstructionError):
            box(1.0, 0.0)

    def test_missing_weights_mean_unit_weights(self):
        self.assertTrue(make_quadratic().matches_weights(None))
        self.assertTrue(make_entropy_simplex(np.ones(3)).matches_weights(None))
        self.assertTrue(make_quadratic().matches_weights(np.ones(3)))
        self.assertFalse(make_quadratic().matches_weights(np.full(3, 0.5)))
        self.assertFalse(make_entropy_simplex(np.ones(3)).matches_weights(np.ones(4)))

    def test_projected_simplex_inherits_weights(self):
        weights = np.array([0.5, 0.5])
        p = make_projected_quadratic(simplex(), weights)
        x = p.conjugate_grad(np.array([3.0, 0.0]))
        self.assertAlmostEqual(float(np.dot(weights, x)), 1.0, places=12)


if __name__ == '__main__':
    unittest.main()
