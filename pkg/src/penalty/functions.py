#!/usr/bin/env python3
"""
Strongly convex penalties R, their conjugates R* and the maps grad R*

All pairings between the domain X and its dual use the weighted inner product
<xi, x> = sum_i w_i xi_i x_i, matching LinearOperator.apply_adjoint.
"""

import logging
from enum import Enum

import numpy as np
from scipy.special import kl_div
from scipy.special import logsumexp
from scipy.special import softmax
from scipy.special import xlogy

from common.errors import ConstructionError
from common.errors import DomainError
from common.vectors import Vector
from common.vectors import inner
from common.vectors import l1_norm
from common.vectors import norm
from penalty.constraints import ConstraintKind
from penalty.constraints import ConstraintSet
from penalty.constraints import constraint_from_params
from penalty.constraints import simplex

logger = logging.getLogger(__name__)

SIMPLEX_MASS_TOL = 1e-9


class PenaltyKind(str, Enum):
    QUADRATIC = 'quadratic'
    PROJECTED_QUADRATIC = 'projected_quadratic'
    ELASTIC_NET = 'elastic_net'
    ENTROPY_SIMPLEX = 'entropy_simplex'


class Penalty:
    """Base class for a proper, lower semicontinuous, sigma-strongly convex R

    Subclasses implement ``evaluate``, ``conjugate_grad`` and ``conjugate_value``.
    ``evaluate`` returns ``math.inf`` outside dom(R).
    """

    kind: PenaltyKind
    sigma: float
    # norm in which sigma-strong convexity holds: 'l2' or 'l1' (weighted)
    norm_kind: str = 'l2'

    def __init__(self, weights: Vector | None = None):
        if weights is not None:
            weights = np.array(weights, dtype=np.float64)
            if weights.ndim != 1 or np.any(weights <= 0) or not np.all(np.isfinite(weights)):
                raise ConstructionError("Penalty weights must be a finite, strictly positive vector")
            weights.setflags(write=False)
        self.weights = weights

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"

    def params(self) -> dict:
        return {}

    def evaluate(self, x: Vector) -> float:
        raise NotImplementedError

    def conjugate_grad(self, xi: Vector) -> Vector:
        raise NotImplementedError

    def conjugate_value(self, xi: Vector) -> float:
        raise NotImplementedError

    def subgradient(self, x: Vector) -> Vector:
        """One element of the subdifferential of R at x"""
        raise NotImplementedError

    def pairing(self, xi: Vector, x: Vector) -> float:
        return inner(xi, x, self.weights)

    def primal_norm(self, x: Vector) -> float:
        return norm(x, self.weights)

    def dual_norm(self, xi: Vector) -> float:
        return norm(xi, self.weights)

    def lipschitz_constant(self, op_norm: float) -> float:
        """L = ||A||^2 / (2 sigma) for the gradient of xi -> R*(A* xi)"""
        return op_norm ** 2 / (2.0 * self.sigma)

    def bregman(self, xbar: Vector, x: Vector, xi: Vector) -> float:
        value_bar = self.evaluate(xbar)
        if not np.isfinite(value_bar):
            return float('inf')
        value = value_bar - self.evaluate(x) - self.pairing(xi, xbar - x)
        return max(float(value), 0.0)

    def matches_weights(self, weights: Vector | None) -> bool:
        """True when both sides describe the same domain; None stands for unit weights"""
        if self.weights is None and weights is None:
            return True
        ours = self.weights if self.weights is not None else np.ones_like(weights, dtype=np.float64)
        theirs = np.asarray(weights, dtype=np.float64) if weights is not None else np.ones_like(ours)
        return ours.shape == theirs.shape and bool(np.allclose(ours, theirs, rtol=1e-12, atol=0))


class QuadraticPenalty(Penalty):
    """R(x) = ||x||^2 / 2, the classical Landweber case"""

    kind = PenaltyKind.QUADRATIC
    sigma = 0.5

    def evaluate(self, x):
        return 0.5 * inner(x, x, self.weights)

    def conjugate_grad(self, xi):
        return np.array(xi, dtype=np.float64)

    def conjugate_value(self, xi):
        return 0.5 * inner(xi, xi, self.weights)

    def subgradient(self, x):
        return np.array(x, dtype=np.float64)


class ProjectedQuadraticPenalty(Penalty):
    """R(x) = ||x||^2 / 2 + indicator of a closed convex set C

    The conjugate gradient is the metric projection P_C.
    """

    kind = PenaltyKind.PROJECTED_QUADRATIC
    sigma = 0.5

    def __init__(self, constraint: ConstraintSet, weights: Vector | None = None):
        super().__init__(weights)
        if constraint.kind is ConstraintKind.SIMPLEX and constraint.weights is None and weights is not None:
            constraint = simplex(constraint.total_mass, self.weights)
        self.constraint = constraint

    def params(self):
        return {'constraint': self.constraint.params()}

    def evaluate(self, x):
        if not self.constraint.contains(x):
            return float('inf')
        return 0.5 * inner(x, x, self.weights)

    def conjugate_grad(self, xi):
        return self.constraint.project(xi)

    def conjugate_value(self, xi):
        projected = self.constraint.project(xi)
        return inner(xi, projected, self.weights) - 0.5 * inner(projected, projected, self.weights)

    def subgradient(self, x):
        if not self.constraint.contains(x):
            raise DomainError("x lies outside the constraint set")
        return np.array(x, dtype=np.float64)


class ElasticNetPenalty(Penalty):
    """R(x) = beta ||x||_1 + alpha/2 ||x||^2 with soft-thresholding as grad R*"""

    kind = PenaltyKind.ELASTIC_NET

    def __init__(self, alpha: float, beta: float, weights: Vector | None = None):
        if not alpha > 0:
            raise ConstructionError(f"Elastic net needs alpha > 0, got {alpha}")
        if not beta >= 0:
            raise ConstructionError(f"Elastic net needs beta >= 0, got {beta}")
        super().__init__(weights)
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.sigma = self.alpha / 2.0

    def params(self):
        return {'alpha': self.alpha, 'beta': self.beta}

    def evaluate(self, x):
        return self.beta * l1_norm(x, self.weights) + 0.5 * self.alpha * inner(x, x, self.weights)

    def conjugate_grad(self, xi):
        return np.sign(xi) * np.maximum(np.abs(xi) - self.beta, 0.0) / self.alpha

    def conjugate_value(self, xi):
        shrunk = np.maximum(np.abs(xi) - self.beta, 0.0)
        return inner(shrunk, shrunk, self.weights) / (2.0 * self.alpha)

    def subgradient(self, x):
        return self.beta * np.sign(x) + self.alpha * np.asarray(x, dtype=np.float64)


class EntropySimplexPenalty(Penalty):
    """Negative Boltzmann-Shannon entropy restricted to the weighted simplex

    R(x) = sum_i w_i x_i log x_i on {x >= 0, sum_i w_i x_i = 1}. Strong convexity
    holds with sigma = 1/2 in the weighted L1 norm, whose dual is the sup norm.
    """

    kind = PenaltyKind.ENTROPY_SIMPLEX
    sigma = 0.5
    norm_kind = 'l1'

    def __init__(self, weights: Vector):
        if weights is None:
            raise ConstructionError("Entropy penalty needs quadrature weights")
        super().__init__(weights)
        self._log_weights = np.log(self.weights)

    def params(self):
        return {'weights': [float(w) for w in self.weights]}

    def in_domain(self, x: Vector) -> bool:
        if np.any(x < 0):
            return False
        return abs(float(np.dot(self.weights, x)) - 1.0) <= SIMPLEX_MASS_TOL

    def evaluate(self, x):
        if not self.in_domain(x):
            return float('inf')
        return float(np.dot(self.weights, xlogy(x, x)))

    def conjugate_grad(self, xi):
        # softmax over xi + log w gives w_i e^{xi_i} / sum_j w_j e^{xi_j}
        return softmax(np.asarray(xi, dtype=np.float64) + self._log_weights) / self.weights

    def conjugate_value(self, xi):
        return float(logsumexp(xi, b=self.weights))

    def subgradient(self, x):
        if not self.in_domain(x) or np.any(x <= 0):
            raise DomainError("Entropy is only subdifferentiable at strictly positive simplex points")
        return 1.0 + np.log(x)

    def primal_norm(self, x):
        return l1_norm(x, self.weights)

    def dual_norm(self, xi):
        return float(np.max(np.abs(xi)))

    def bregman(self, xbar, x, xi):
        if not self.in_domain(xbar):
            return float('inf')
        # on the simplex every subgradient gives the Kullback-Leibler functional
        return kullback_leibler(xbar, x, self.weights)


def kullback_leibler(xbar: Vector, x: Vector, weights: Vector | None = None) -> float:
    """D(xbar, x) = sum_i w_i (xbar_i log(xbar_i / x_i) - xbar_i + x_i)"""
    terms = kl_div(xbar, x)
    if weights is None:
        return float(np.sum(terms))
    return float(np.dot(weights, terms))


def make_quadratic(weights: Vector | None = None) -> QuadraticPenalty:
    return QuadraticPenalty(weights)


def make_projected_quadratic(c: ConstraintSet, weights: Vector | None = None) -> ProjectedQuadraticPenalty:
    return ProjectedQuadraticPenalty(c, weights)


def make_entropy_simplex(weights: Vector) -> EntropySimplexPenalty:
    return EntropySimplexPenalty(weights)


def make_elastic_net(alpha: float, beta: float, weights: Vector | None = None) -> ElasticNetPenalty:
    return ElasticNetPenalty(alpha, beta, weights)


def make_penalty(kind: str | PenaltyKind, weights: Vector | None = None, **params) -> Penalty:
    """Build a penalty by kind name, used by problem files and experiment configs

    Args:
        kind: One of the PenaltyKind values
        weights: Domain quadrature weights (required for entropy_simplex)
        **params: ``constraint`` (a ConstraintSet or its params dict) for the
            projected quadratic, ``alpha`` and ``beta`` for the elastic net
    """
    try:
        kind = PenaltyKind(kind)
    except ValueError:
        raise ConstructionError(f"Unknown penalty kind '{kind}'") from None

    if kind is PenaltyKind.QUADRATIC:
        return make_quadratic(weights)
    if kind is PenaltyKind.PROJECTED_QUADRATIC:
        constraint = params.get('constraint', {'kind': 'nonneg_orthant'})
        if isinstance(constraint, str):
            constraint = {'kind': constraint}
        if isinstance(constraint, dict):
            constraint = constraint_from_params(constraint)
        return make_projected_quadratic(constraint, weights)
    if kind is PenaltyKind.ELASTIC_NET:
        return make_elastic_net(params.get('alpha', 1.0), params.get('beta', 0.0), weights)
    return make_entropy_simplex(weights)
