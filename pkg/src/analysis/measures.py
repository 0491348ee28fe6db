"""Error measures between a reconstruction and the exact solution."""

import logging
from enum import Enum

import numpy as np

from common.vectors import Vector
from common.vectors import l1_norm
from common.vectors import norm
from penalty.checks import SampledCheckReport
from penalty.checks import bregman
from penalty.functions import Penalty
from penalty.functions import kullback_leibler

logger = logging.getLogger(__name__)


class Measure(str, Enum):
    NORM = 'norm'
    NORM_SQ_HALF = 'norm_sq_half'
    BREGMAN = 'bregman'
    L1 = 'l1'
    KL = 'kl'


def error_measure(measure: str | Measure, p: Penalty, x: Vector, xref: Vector,
                  xi_ref: Vector | None = None) -> float:
    """Distance of x from xref in the chosen measure

    Norms use the penalty's domain weights. ``kl`` is D(x, xref) and
    ``bregman`` is D_{xi_ref}(x, xref), which needs xi_ref in the subdifferential
    of R at xref.
    """
    measure = Measure(measure)
    weights = p.weights
    if measure is Measure.NORM:
        return norm(x - xref, weights)
    if measure is Measure.NORM_SQ_HALF:
        return 0.5 * norm(x - xref, weights) ** 2
    if measure is Measure.L1:
        return l1_norm(x - xref, weights)
    if measure is Measure.KL:
        value = kullback_leibler(x, xref, weights)
        if np.isinf(value):
            logger.warning("KL divergence is infinite: the reference vanishes where x is positive")
        return value
    if xi_ref is None:
        raise ValueError("The bregman measure needs xi_ref, a subgradient of R at the reference")
    return bregman(p, x, xref, xi_ref)


def kl_l1_bound_check(weights: Vector | None, samples: int, seed: int, dim: int = 8,
                      slack: float = 1e-10) -> SampledCheckReport:
    """Sample densities x, x_tilde of unit weighted mass and check
    ||x - x_tilde||_1^2 <= (4/3 ||x||_1 + 2/3 ||x_tilde||_1) D(x_tilde, x)

    The report's ratio is the largest observed left/right quotient.
    """
    rng = np.random.default_rng(seed)
    w = np.ones(dim) if weights is None else np.asarray(weights, dtype=np.float64)
    n = w.size

    max_ratio = 0.0
    violations = 0
    for _ in range(samples):
        concentration = 10.0 ** rng.uniform(-1.0, 1.0)
        x = rng.dirichlet(np.full(n, concentration)) / w
        x_tilde = rng.dirichlet(np.full(n, concentration)) / w
        lhs = l1_norm(x - x_tilde, w) ** 2
        rhs = (4.0 / 3.0 * l1_norm(x, w) + 2.0 / 3.0 * l1_norm(x_tilde, w)) * kullback_leibler(x_tilde, x, w)
        if lhs > rhs + slack:
            violations += 1
        if rhs > 0:
            max_ratio = max(max_ratio, lhs / rhs)
    return SampledCheckReport(extreme_ratio=max_ratio, violations=violations, samples=samples)
