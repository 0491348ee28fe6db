#!/usr/bin/env python3
"""
The quantity eta_n that controls the a-priori error bounds

    eta_n = sup_x { R(x_dagger) - R(x) - mu ||Ax - y||^2 },  mu = coeff * gamma * (n + 1)
          = R(x_dagger) + min_lambda { R*(A* lambda) - <lambda, y> + ||lambda||^2 / (4 mu) }

Quadratic penalties give a closed form through the SVD. Every other penalty is
handled by an accelerated gradient method on the strongly convex dual problem,
whose iterates bracket eta_n between a primal lower and a dual upper bound.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from common.vectors import Vector
from linop.operator import LinearOperator
from linop.operator import weighted_svd
from penalty.functions import Penalty
from penalty.functions import PenaltyKind
from solver.stopping import lipschitz_constant

logger = logging.getLogger(__name__)

ETA_TOL = 1e-9
ETA_MAX_ITER = 50000


@dataclass(frozen=True)
class EtaEstimate:
    """eta_n with its certificate

    ``value`` is a certified lower bound (clamped at zero) and ``upper`` a
    certified upper bound; ``gap`` is their difference before clamping.
    """
    value: float
    upper: float
    gap: float
    iterations: int
    converged: bool
    exact: bool


def eta_weight(n: int, gamma: float, coeff: float) -> float:
    return coeff * gamma * (n + 1)


def _quadratic_eta(op: LinearOperator, y: Vector, p: Penalty, xdagger: Vector, mu: float) -> EtaEstimate:
    # min_x ||x||^2/2 + mu ||Ax - y||^2 = mu sum_i b_i^2 / (1 + 2 mu s_i^2) + mu ||y_perp||^2
    u, s, _ = weighted_svd(op)
    b = u.T @ y
    perp = max(float(np.dot(y, y)) - float(np.dot(b, b)), 0.0)
    minimum = mu * float(np.sum(b ** 2 / (1.0 + 2.0 * mu * s ** 2))) + mu * perp
    value = p.evaluate(xdagger) - minimum
    return EtaEstimate(value=max(value, 0.0), upper=max(value, 0.0), gap=0.0, iterations=0,
                       converged=True, exact=True)


def eta_oracle(n: int, gamma: float, coeff: float, op: LinearOperator, y: Vector, p: Penalty,
               xdagger: Vector, tol: float = ETA_TOL, max_iter: int = ETA_MAX_ITER,
               lipschitz: float | None = None) -> EtaEstimate:
    """Evaluate eta_n for the given step size and weight coefficient (1/3 or 1/2)

    Args:
        n: Iteration index, n >= 0
        gamma: Step size of the dual gradient method
        coeff: Weight coefficient of the residual term
        op: Forward operator
        y: Exact data A x_dagger
        p: Penalty
        xdagger: Exact solution
        tol: Relative duality gap that counts as converged
        max_iter: Iteration cap of the inner solver
        lipschitz: Precomputed ||A||^2 / (2 sigma)

    Returns:
        EtaEstimate; ``converged`` is False when the gap is still above tol
    """
    if n < 0 or not gamma > 0 or not coeff > 0:
        raise ValueError(f"eta_n needs n >= 0, gamma > 0 and coeff > 0 (got {n}, {gamma}, {coeff})")
    mu = eta_weight(n, gamma, coeff)
    r_dagger = p.evaluate(xdagger)
    if not math.isfinite(r_dagger):
        raise ValueError("x_dagger lies outside dom(R)")

    if p.kind is PenaltyKind.QUADRATIC:
        return _quadratic_eta(op, y, p, xdagger, mu)

    smooth = (lipschitz if lipschitz is not None else lipschitz_constant(op, p)) + 1.0 / (2.0 * mu)
    strong = 1.0 / (2.0 * mu)
    kappa = smooth / strong
    momentum = (math.sqrt(kappa) - 1.0) / (math.sqrt(kappa) + 1.0)

    lam = np.zeros(op.range_dim)
    lam_prev = lam
    lower = -math.inf
    upper = math.inf
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        xi = op.adjoint(lam)
        x = p.conjugate_grad(xi)
        ax_minus_y = op.forward(x) - y
        dual = p.conjugate_value(xi) - float(np.dot(lam, y)) + float(np.dot(lam, lam)) / (4.0 * mu)
        primal = p.evaluate(x) + mu * float(np.dot(ax_minus_y, ax_minus_y))
        upper = min(upper, r_dagger + dual)
        lower = max(lower, r_dagger - primal)
        if upper - lower <= tol * max(1.0, abs(primal)):
            converged = True
            break

        hat_lam = lam + momentum * (lam - lam_prev)
        hat_x = p.conjugate_grad(op.adjoint(hat_lam))
        gradient = op.forward(hat_x) - y + hat_lam / (2.0 * mu)
        lam_prev, lam = lam, hat_lam - gradient / smooth

    if not converged:
        logger.warning(f"eta oracle at n={n} stopped with duality gap {upper - lower:.3e} after {max_iter} steps")
    return EtaEstimate(value=max(lower, 0.0), upper=upper, gap=upper - lower, iterations=iteration,
                       converged=converged, exact=False)


def discrepancy_constant(gamma: float, tau: float, lipschitz: float) -> float:
    """c_2 = ((1 - L gamma) tau^2 / 2 - 1/2) gamma"""
    return ((0.5 - 0.5 * lipschitz * gamma) * tau ** 2 - 0.5) * gamma


def discrepancy_lower_bound(n: int, delta: float, gamma: float, tau: float, lipschitz: float) -> float:
    """Lower bound c_2 (n + 1) delta^2 for eta_n (coefficient 1/2) at n = n_delta - 1"""
    return discrepancy_constant(gamma, tau, lipschitz) * (n + 1) * delta ** 2


def apriori_eta_constant(M: float, q: float, gamma: float) -> float:
    """c_1 in eta_n <= c_1 (n + 1)^{-q/(2-q)} under the variational source condition"""
    return (1.0 - q / 2.0) * (3.0 * q * M / (2.0 * gamma)) ** (q / (2.0 - q)) * M
