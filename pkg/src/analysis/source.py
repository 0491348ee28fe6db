#!/usr/bin/env python3
"""
Source conditions: building exact solutions that satisfy them and checking
the variational inequalities the convergence rates rest on
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from common.errors import ConstructionError
from common.vectors import Vector
from common.vectors import as_vector
from common.vectors import check_dim
from linop.operator import LinearOperator
from linop.operator import weighted_svd
from penalty.checks import fenchel_young_residual
from penalty.constraints import ConstraintSet
from penalty.functions import Penalty
from penalty.functions import PenaltyKind

logger = logging.getLogger(__name__)

CERTIFICATE_TOL = 1e-8
MAX_SVD_DIM = 2000


class SourceKind(str, Enum):
    DUAL_ELEMENT = 'dual_element'
    PROJECTED_POWER = 'projected_power'
    ENTROPIC = 'entropic'


@dataclass(frozen=True)
class SourceSpec:
    """How an exact solution was generated

    dual_element and entropic carry lambda_dagger with A* lambda_dagger a
    subgradient of R at x_dagger; projected_power carries nu and omega.
    """
    kind: SourceKind
    lambda_dagger: Vector | None = None
    nu: float | None = None
    omega: Vector | None = None

    def to_dict(self) -> dict:
        data = {'kind': self.kind.value}
        if self.lambda_dagger is not None:
            data['lambda_dagger'] = [float(v) for v in self.lambda_dagger]
        if self.nu is not None:
            data['nu'] = self.nu
        if self.omega is not None:
            data['omega'] = [float(v) for v in self.omega]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'SourceSpec':
        def vector(key):
            return None if data.get(key) is None else np.array(data[key], dtype=np.float64)
        return cls(SourceKind(data['kind']), vector('lambda_dagger'), data.get('nu'), vector('omega'))


@dataclass(frozen=True)
class VariationalReport:
    """Minimum slack of E(x) <= R(x) - R(x_dagger) + M ||Ax - y||^q over the samples"""
    min_slack: float
    violations: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def construct_source_solution(op: LinearOperator, p: Penalty, lambda_dagger: Vector) -> Vector:
    """x_dagger = grad R*(A* lambda_dagger), so A* lambda_dagger is a subgradient at x_dagger"""
    lam = as_vector(lambda_dagger, 'lambda_dagger')
    check_dim(lam, op.range_dim, 'lambda_dagger')
    return p.conjugate_grad(op.adjoint(lam))


def source_certificate(op: LinearOperator, p: Penalty, xdagger: Vector, lambda_dagger: Vector) -> float:
    """Fenchel-Young residual at (x_dagger, A* lambda_dagger), relative to the pairing scale"""
    xi = op.adjoint(lambda_dagger)
    residual = fenchel_young_residual(p, xdagger, xi)
    return residual / max(1.0, abs(p.pairing(xi, xdagger)))


def is_certified(op: LinearOperator, p: Penalty, xdagger: Vector, lambda_dagger: Vector,
                 tol: float = CERTIFICATE_TOL) -> bool:
    return bool(source_certificate(op, p, xdagger, lambda_dagger) <= tol)


def fractional_power(op: LinearOperator, nu: float, omega: Vector) -> Vector:
    """(A*A)^{nu/2} omega computed from the weighted SVD"""
    if op.domain_dim > MAX_SVD_DIM:
        raise ConstructionError(f"Dense SVD of a {op.domain_dim}-dimensional operator is too large; "
                                f"use n <= {MAX_SVD_DIM}")
    try:
        _, s, vt = weighted_svd(op)
    except (np.linalg.LinAlgError, MemoryError) as e:
        raise ConstructionError(f"SVD failed ({e}); retry with a smaller n") from e
    sqrt_w = np.ones(op.domain_dim) if op.domain_weights is None else np.sqrt(op.domain_weights)
    coefficients = vt @ (sqrt_w * omega)
    # components of omega orthogonal to the row space are annihilated by (A*A)^{nu/2}
    return (vt.T @ (s ** nu * coefficients)) / sqrt_w


def construct_projected_power_solution(op: LinearOperator, nu: float, omega: Vector,
                                       c: ConstraintSet) -> Vector:
    """x_dagger = P_C((A*A)^{nu/2} omega) for 0 < nu <= 1"""
    if not 0 < nu <= 1:
        raise ConstructionError(f"nu must lie in (0, 1], got {nu}")
    omega = as_vector(omega, 'omega')
    check_dim(omega, op.domain_dim, 'omega')
    return c.project(fractional_power(op, nu, omega))


def projected_source_constant(nu: float) -> float:
    """c_nu = 2^{-2nu/(1+nu)} (1+nu) (1-nu)^{(1-nu)/(1+nu)} with 0^0 = 1"""
    if not 0 < nu <= 1:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    return 2.0 ** (-2.0 * nu / (1.0 + nu)) * (1.0 + nu) * (1.0 - nu) ** ((1.0 - nu) / (1.0 + nu))


def projected_source_parameters(nu: float, omega_norm: float) -> tuple[float, float]:
    """(M, q) of the variational inequality implied by x_dagger = P_C((A*A)^{nu/2} omega)"""
    return projected_source_constant(nu) * omega_norm ** (2.0 / (1.0 + nu)), 2.0 * nu / (1.0 + nu)


def variational_sc_margin(op: LinearOperator, p: Penalty, xdagger: Vector, M: float, q: float,
                          samples: int, seed: int, *, xi_dagger: Vector | None = None,
                          slack_tol: float = 1e-8) -> VariationalReport:
    """Sample x in dom(R) and evaluate the variational source inequality

    The left-hand side follows the penalty: a quarter of the squared norm for
    projected quadratics, half the squared L1 distance for the entropy and the
    Bregman distance D_{xi_dagger}(x, x_dagger) otherwise (which needs xi_dagger).
    Samples are images of grad R* around xi_dagger at scales from 1e-3 to 10.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    if p.kind is PenaltyKind.PROJECTED_QUADRATIC:
        def error(x):
            return 0.25 * p.primal_norm(x - xdagger) ** 2
    elif p.kind is PenaltyKind.ENTROPY_SIMPLEX:
        def error(x):
            return 0.5 * p.primal_norm(x - xdagger) ** 2
    else:
        if xi_dagger is None:
            raise ValueError(f"{p.kind.value} penalty needs xi_dagger for the Bregman distance")

        def error(x):
            return p.bregman(x, xdagger, xi_dagger)

    rng = np.random.default_rng(seed)
    y = op.forward(xdagger)
    r_dagger = p.evaluate(xdagger)
    center = np.array(xdagger if xi_dagger is None else xi_dagger, dtype=np.float64)

    min_slack = float('inf')
    violations = 0
    for k in range(samples):
        if k == 0:
            x = np.array(xdagger, dtype=np.float64)
        else:
            scale = 10.0 ** rng.uniform(-3.0, 1.0)
            x = p.conjugate_grad(center + scale * rng.standard_normal(op.domain_dim))
        residual = float(np.linalg.norm(op.forward(x) - y))
        lhs = error(x)
        rhs = p.evaluate(x) - r_dagger + M * residual ** q
        slack = rhs - lhs
        if slack < -slack_tol * max(1.0, abs(lhs)):
            violations += 1
        min_slack = min(min_slack, slack)

    if violations:
        logger.warning(f"Variational source inequality violated at {violations}/{samples} samples")
    return VariationalReport(min_slack=min_slack, violations=violations, samples=samples)
