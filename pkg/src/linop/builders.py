#!/usr/bin/env python3
"""
Builders for discretized integral operators and simple test operators
"""

import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg

from common.errors import ConstructionError
from common.vectors import Vector
from common.vectors import as_vector
from linop.operator import LinearOperator

logger = logging.getLogger(__name__)

QUADRATURES = ('midpoint', 'trapezoid')
CONVOLUTION_MODES = ('zero_pad',)


def quadrature_nodes(n: int, quadrature: str = 'midpoint') -> tuple[Vector, Vector]:
    """Nodes and weights of an n-point rule on [0, 1]"""
    if n < 2:
        raise ConstructionError(f"Quadrature needs at least 2 nodes, got n={n}")
    if quadrature == 'midpoint':
        nodes = (np.arange(n) + 0.5) / n
        weights = np.full(n, 1.0 / n)
    elif quadrature == 'trapezoid':
        nodes = np.linspace(0.0, 1.0, n)
        weights = np.full(n, 1.0 / (n - 1))
        weights[[0, -1]] *= 0.5
    else:
        raise ConstructionError(f"Unknown quadrature '{quadrature}', expected one of {QUADRATURES}")
    return nodes, weights


def from_matrix(matrix: np.ndarray, domain_weights: Vector | None = None, label: str = 'matrix') -> LinearOperator:
    """Wrap a dense matrix M as the operator x -> Mx"""
    matrix = np.array(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ConstructionError(f"Expected a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ConstructionError("Matrix has non-finite entries")
    matrix.setflags(write=False)
    weights = None if domain_weights is None else np.array(domain_weights, dtype=np.float64)
    transpose = matrix.T

    if weights is None:
        def adjoint(v):
            return transpose @ v
    else:
        def adjoint(v):
            return (transpose @ v) / weights

    return LinearOperator(
        matrix.shape[1], matrix.shape[0], lambda x: matrix @ x, adjoint,
        domain_weights=weights, matrix=matrix, label=label,
    )


def diagonal(entries) -> LinearOperator:
    """Diagonal operator x -> d * x on Euclidean spaces"""
    d = as_vector(entries, 'diagonal entries').copy()
    d.setflags(write=False)
    return LinearOperator(
        d.size, d.size, lambda x: d * x, lambda v: d * v,
        matrix=np.diag(d), label=f"diag({d.size})",
    )


def identity(n: int) -> LinearOperator:
    return diagonal(np.ones(n))


def _evaluate_kernel(kernel: Callable[[float, float], float], s: Vector, t: Vector) -> np.ndarray:
    grid_s, grid_t = np.meshgrid(s, t, indexing='ij')
    try:
        values = np.asarray(kernel(grid_s, grid_t), dtype=np.float64)
        values = np.broadcast_to(values, grid_s.shape).copy()
    except (TypeError, ValueError):
        logger.debug("Kernel does not broadcast over arrays, evaluating pointwise")
        values = np.vectorize(kernel, otypes=[np.float64])(grid_s, grid_t)
    return values


def build_fredholm(kernel: Callable[[float, float], float], n: int, quadrature: str = 'midpoint') -> LinearOperator:
    """Discretize (Ax)(s) = int_0^1 k(s, t) x(t) dt on n nodes

    Collocation points coincide with the quadrature nodes. The domain carries the
    quadrature weights, so A* is the discretized transposed integral operator.

    Raises:
        ConstructionError: if n < 2, the quadrature is unknown or the kernel is non-finite
    """
    nodes, weights = quadrature_nodes(n, quadrature)
    values = _evaluate_kernel(kernel, nodes, nodes)
    if not np.all(np.isfinite(values)):
        raise ConstructionError("Kernel produced non-finite values on the quadrature grid")
    matrix = values * weights[None, :]
    logger.debug(f"Built {n}-point {quadrature} Fredholm operator")
    return from_matrix(matrix, domain_weights=weights, label=f"fredholm({quadrature}, n={n})")


def build_convolution(psf, n: int, mode: str = 'zero_pad', origin: int = 0) -> LinearOperator:
    """Discrete convolution y_k = sum_j psf_j x_{k - j + origin} on n samples

    Samples outside 0..n-1 are treated as zero, so the operator is the n x n Toeplitz
    section of the full convolution and its adjoint is correlation with the psf.
    ``origin`` shifts the kernel so that psf[origin] sits on the diagonal.
    """
    kernel = as_vector(psf, 'psf')
    if mode not in CONVOLUTION_MODES:
        raise ConstructionError(f"Unknown convolution mode '{mode}', expected one of {CONVOLUTION_MODES}")
    if kernel.size > n:
        raise ConstructionError(f"PSF of length {kernel.size} exceeds signal length {n}")
    if not 0 <= origin < kernel.size:
        raise ConstructionError(f"origin {origin} outside the PSF support 0..{kernel.size - 1}")

    column = np.zeros(n)
    lower = kernel[origin:origin + n]
    column[:lower.size] = lower
    row = np.zeros(n)
    upper = kernel[origin::-1][:n]
    row[:upper.size] = upper
    matrix = scipy.linalg.toeplitz(column, row)
    return from_matrix(matrix, label=f"convolution({mode}, n={n}, psf={kernel.size})")
