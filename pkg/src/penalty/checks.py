#!/usr/bin/env python3
"""
Sampled checks of the convexity properties every penalty must satisfy
"""

import logging
from dataclasses import dataclass

import numpy as np

from common.errors import DomainError
from common.vectors import Vector
from penalty.functions import Penalty

logger = logging.getLogger(__name__)

FENCHEL_YOUNG_TOL = 1e-6
DEFAULT_DIM = 8


@dataclass(frozen=True)
class SampledCheckReport:
    """Outcome of a sampled inequality check

    ``extreme_ratio`` is the minimum (strong convexity) or maximum (Lipschitz)
    observed ratio; the check passes when ``violations`` is zero.
    """
    extreme_ratio: float
    violations: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def fenchel_young_residual(p: Penalty, x: Vector, xi: Vector) -> float:
    """R(x) + R*(xi) - <xi, x>, nonnegative and zero exactly when xi is a subgradient at x"""
    return p.evaluate(x) + p.conjugate_value(xi) - p.pairing(xi, x)


def bregman(p: Penalty, xbar: Vector, x: Vector, xi: Vector) -> float:
    """Bregman distance R(xbar) - R(x) - <xi, xbar - x>

    Returns +inf when xbar lies outside dom(R).

    Raises:
        DomainError: if xi is not a subgradient of R at x up to the Fenchel-Young tolerance
    """
    residual = fenchel_young_residual(p, x, xi)
    scale = max(1.0, abs(p.pairing(xi, x)))
    if not np.isfinite(residual) or residual > FENCHEL_YOUNG_TOL * scale:
        raise DomainError(f"xi is not a subgradient at x (Fenchel-Young residual {residual:.3e})")
    return p.bregman(xbar, x, xi)


def _dimension(p: Penalty, dim: int | None) -> int:
    if p.weights is not None:
        return p.weights.size
    return dim or DEFAULT_DIM


def _sample_dual(rng: np.random.Generator, n: int) -> Vector:
    # mix small and large scales so both the interior and the boundary of dom(R) are hit
    return rng.standard_normal(n) * 10.0 ** rng.uniform(-1.0, 1.0)


def strong_convexity_check(p: Penalty, samples: int, seed: int, dim: int | None = None,
                           slack: float = 1e-8) -> SampledCheckReport:
    """Check D(xbar, x) >= sigma ||x - xbar||^2 on sampled pairs

    Both points are images of grad R*, so x is paired with the subgradient that
    produced it and xbar lies in dom(R).
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    rng = np.random.default_rng(seed)
    n = _dimension(p, dim)

    min_ratio = float('inf')
    violations = 0
    for _ in range(samples):
        xi = _sample_dual(rng, n)
        x = p.conjugate_grad(xi)
        xbar = p.conjugate_grad(_sample_dual(rng, n))
        distance_sq = p.primal_norm(x - xbar) ** 2
        if distance_sq == 0.0:
            continue
        divergence = p.bregman(xbar, x, xi)
        if divergence < p.sigma * distance_sq - slack:
            violations += 1
        min_ratio = min(min_ratio, divergence / (p.sigma * distance_sq))

    if violations:
        logger.warning(f"{p!r}: {violations}/{samples} strong convexity violations")
    return SampledCheckReport(extreme_ratio=min_ratio, violations=violations, samples=samples)


def lipschitz_check(p: Penalty, samples: int, seed: int, dim: int | None = None,
                    slack: float = 1e-10) -> SampledCheckReport:
    """Check ||grad R*(xi) - grad R*(eta)|| <= ||xi - eta||_* / (2 sigma) on sampled pairs"""
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    rng = np.random.default_rng(seed)
    n = _dimension(p, dim)
    bound = 1.0 / (2.0 * p.sigma)

    max_ratio = 0.0
    violations = 0
    for _ in range(samples):
        xi = _sample_dual(rng, n)
        eta = xi + _sample_dual(rng, n) * rng.uniform(1e-3, 1.0)
        step = p.primal_norm(p.conjugate_grad(xi) - p.conjugate_grad(eta))
        gap = p.dual_norm(xi - eta)
        if step > bound * gap + slack:
            violations += 1
        if gap > 0:
            max_ratio = max(max_ratio, step / gap)

    return SampledCheckReport(extreme_ratio=max_ratio, violations=violations, samples=samples)
