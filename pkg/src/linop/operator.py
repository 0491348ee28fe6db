#!/usr/bin/env python3
"""
Linear operators between finite-dimensional real spaces

The domain X carries the inner product <u, v>_X = sum_i w_i u_i v_i with positive
quadrature weights w (Euclidean when no weights are given); the range Y is
Euclidean. The adjoint is taken with respect to these inner products, so a dense
operator with matrix M has A* v = M^T v / w.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from common.errors import ConstructionError
from common.vectors import Vector
from common.vectors import check_dim
from common.vectors import norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NormEstimate:
    """Power-method estimate of the operator norm ||A||"""
    value: float
    iterations: int
    converged: bool


class LinearOperator:
    """A bounded linear map with forward and adjoint actions

    Instances are immutable after construction; ``forward`` and ``adjoint`` are
    pure functions and skip dimension checks, so solvers validate once and then
    call them directly inside their loops.
    """

    __slots__ = ('_domain_dim', '_range_dim', '_forward', '_adjoint', '_weights', '_matrix', '_label')

    def __init__(self, domain_dim: int, range_dim: int,
                 forward: Callable[[Vector], Vector], adjoint: Callable[[Vector], Vector],
                 domain_weights: Vector | None = None, matrix: np.ndarray | None = None,
                 label: str = ''):
        """Initialize the operator

        Args:
            domain_dim: Dimension of X
            range_dim: Dimension of Y
            forward: Map x -> Ax
            adjoint: Map v -> A*v (already including the weight division)
            domain_weights: Optional positive quadrature weights on X
            matrix: Optional dense matrix M with Ax = Mx
            label: Human readable description
        """
        if domain_dim < 1 or range_dim < 1:
            raise ConstructionError(f"Operator dimensions must be positive, got {domain_dim}x{range_dim}")
        if domain_weights is not None:
            domain_weights = np.array(domain_weights, dtype=np.float64)
            check_dim(domain_weights, domain_dim, 'domain_weights')
            if not np.all(np.isfinite(domain_weights)) or np.any(domain_weights <= 0):
                raise ConstructionError("domain_weights must be finite and strictly positive")
            domain_weights.setflags(write=False)
        if matrix is not None:
            matrix = np.array(matrix, dtype=np.float64)
            if matrix.shape != (range_dim, domain_dim):
                raise ConstructionError(f"Matrix shape {matrix.shape} does not match {range_dim}x{domain_dim}")
            matrix.setflags(write=False)
        object.__setattr__(self, '_domain_dim', int(domain_dim))
        object.__setattr__(self, '_range_dim', int(range_dim))
        object.__setattr__(self, '_forward', forward)
        object.__setattr__(self, '_adjoint', adjoint)
        object.__setattr__(self, '_weights', domain_weights)
        object.__setattr__(self, '_matrix', matrix)
        object.__setattr__(self, '_label', label)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        return f"LinearOperator({self._label or 'anonymous'}, {self._range_dim}x{self._domain_dim})"

    @property
    def domain_dim(self) -> int:
        return self._domain_dim

    @property
    def range_dim(self) -> int:
        return self._range_dim

    @property
    def domain_weights(self) -> Vector | None:
        return self._weights

    @property
    def matrix(self) -> np.ndarray | None:
        return self._matrix

    @property
    def label(self) -> str:
        return self._label

    @property
    def forward(self) -> Callable[[Vector], Vector]:
        return self._forward

    @property
    def adjoint(self) -> Callable[[Vector], Vector]:
        return self._adjoint

    def apply(self, x: Vector) -> Vector:
        check_dim(x, self._domain_dim, 'x')
        return self._forward(x)

    def apply_adjoint(self, v: Vector) -> Vector:
        check_dim(v, self._range_dim, 'v')
        return self._adjoint(v)

    def domain_inner(self, u: Vector, v: Vector) -> float:
        return float(np.dot(u * self._weights, v)) if self._weights is not None else float(np.dot(u, v))

    def domain_norm(self, u: Vector) -> float:
        return norm(u, self._weights)

    def to_dense(self) -> np.ndarray:
        """Dense matrix M with Ax = Mx (assembled column by column for closures)"""
        if self._matrix is not None:
            return self._matrix
        columns = [self._forward(e) for e in np.eye(self._domain_dim)]
        return np.column_stack(columns)

    def scaled(self, factor: float) -> 'LinearOperator':
        """Return the operator factor * A"""
        forward, adjoint = self._forward, self._adjoint
        matrix = None if self._matrix is None else factor * self._matrix
        return LinearOperator(
            self._domain_dim, self._range_dim,
            lambda x: factor * forward(x), lambda v: factor * adjoint(v),
            domain_weights=self._weights, matrix=matrix,
            label=f"{factor:.6g}*{self._label}" if self._label else '',
        )


def apply(op: LinearOperator, x: Vector) -> Vector:
    """Evaluate Ax, raising DimensionMismatchError on a wrong-sized x"""
    return op.apply(x)


def apply_adjoint(op: LinearOperator, v: Vector) -> Vector:
    """Evaluate A*v, raising DimensionMismatchError on a wrong-sized v"""
    return op.apply_adjoint(v)


def estimate_norm(op: LinearOperator, tol: float = 1e-8, max_iter: int = 1000, seed: int = 0) -> NormEstimate:
    """Estimate ||A|| by power iteration on A*A

    The Rayleigh quotient <x, A*Ax>_X = ||Ax||^2 of a unit vector never exceeds
    ||A||^2, so the estimate approaches the norm from below.

    Args:
        op: Operator
        tol: Relative change of successive Rayleigh quotients that counts as converged
        max_iter: Maximum number of power steps
        seed: Seed of the random start vector

    Returns:
        NormEstimate
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.domain_dim)
    x /= op.domain_norm(x)

    previous = None
    for iteration in range(1, max_iter + 1):
        ax = op.forward(x)
        rayleigh = float(np.dot(ax, ax))
        if rayleigh == 0.0:
            logger.debug(f"Power iteration hit the null space of {op!r}; treating as zero operator")
            return NormEstimate(value=0.0, iterations=iteration, converged=True)
        if previous is not None and abs(rayleigh - previous) < tol * rayleigh:
            return NormEstimate(value=float(np.sqrt(rayleigh)), iterations=iteration, converged=True)
        previous = rayleigh
        z = op.adjoint(ax)
        z_norm = op.domain_norm(z)
        if z_norm == 0.0:
            return NormEstimate(value=0.0, iterations=iteration, converged=True)
        x = z / z_norm

    logger.warning(f"Power iteration for {op!r} did not converge in {max_iter} steps")
    return NormEstimate(value=float(np.sqrt(previous)), iterations=max_iter, converged=False)


def estimate_l1_norm(op: LinearOperator) -> float:
    """Norm of A from the weighted L1 domain to Y

    A convex function on the L1 unit ball is maximized at an extreme point
    +-e_i / w_i, hence the value is max_i ||A e_i|| / w_i.
    """
    dense = op.to_dense()
    column_norms = np.linalg.norm(dense, axis=0)
    weights = op.domain_weights if op.domain_weights is not None else np.ones(op.domain_dim)
    return float(np.max(column_norms / weights))


def weighted_svd(op: LinearOperator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of A in the weighted inner products

    Returns U, s, Vt with M W^{-1/2} = U diag(s) Vt, so the right singular vectors
    of A are W^{-1/2} Vt[k].
    """
    dense = op.to_dense()
    if op.domain_weights is not None:
        dense = dense / np.sqrt(op.domain_weights)[None, :]
    return scipy.linalg.svd(dense, full_matrices=False)


def singular_values(op: LinearOperator) -> Vector:
    """Singular values of A (descending), dense oracle for desk-scale operators"""
    dense = op.to_dense()
    if op.domain_weights is not None:
        dense = dense / np.sqrt(op.domain_weights)[None, :]
    return scipy.linalg.svdvals(dense)
