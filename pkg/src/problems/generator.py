#!/usr/bin/env python3
"""
Reproducible test problems whose exact solutions satisfy a source condition

Every generator first picks a seeded lambda_dagger in Y (a smooth unit vector, or
equal weight on every singular direction for the density problem) and derives
x_dagger = grad R*(A* lambda_dagger), so the hypotheses of the rate results hold
exactly and the solver is the only thing under test.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import fft

from analysis.source import SourceKind
from analysis.source import SourceSpec
from analysis.source import construct_source_solution
from common.errors import ConstructionError
from common.vectors import Vector
from linop.builders import build_convolution
from linop.builders import build_fredholm
from linop.builders import diagonal
from linop.operator import LinearOperator
from linop.operator import singular_values
from linop.operator import weighted_svd
from penalty.constraints import nonneg_orthant
from penalty.functions import Penalty
from penalty.functions import PenaltyKind
from penalty.functions import make_entropy_simplex
from penalty.functions import make_projected_quadratic
from penalty.functions import make_quadratic

logger = logging.getLogger(__name__)

MIN_SIZE = 8
GRAVITY_DEPTH = 0.25
DENSITY_KERNEL_WIDTH = 0.05
DENSITY_COEFFICIENT = 0.1
SPECTRAL_DECAY = 1.0


@dataclass(frozen=True)
class ProblemInstance:
    """An operator, an exact solution and the data it produces"""
    name: str
    n: int
    seed: int
    op: LinearOperator
    x_true: Vector
    y_exact: Vector
    source: SourceSpec
    penalty: Penalty
    label: str

    @property
    def penalty_kind(self) -> PenaltyKind:
        return self.penalty.kind

    @property
    def lambda_dagger(self) -> Vector | None:
        return self.source.lambda_dagger

    @property
    def xi_dagger(self) -> Vector | None:
        """A* lambda_dagger, a subgradient of R at x_true"""
        if self.source.lambda_dagger is None:
            return None
        return self.op.adjoint(self.source.lambda_dagger)


@dataclass(frozen=True)
class NoisyData:
    ydelta: Vector
    delta: float
    seed: int


def add_noise(y: Vector, delta: float, seed: int) -> NoisyData:
    """Add a seeded Gaussian direction scaled to norm exactly delta"""
    if delta < 0:
        raise ValueError(f"Noise level must be nonnegative, got {delta}")
    y = np.asarray(y, dtype=np.float64)
    if delta == 0:
        return NoisyData(ydelta=y.copy(), delta=0.0, seed=seed)
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(y.size)
    ydelta = y + direction * (delta / np.linalg.norm(direction))
    # one correction against the rounding of y + e
    realized = np.linalg.norm(ydelta - y)
    ydelta = y + (ydelta - y) * (delta / realized)
    return NoisyData(ydelta=ydelta, delta=float(delta), seed=seed)


def smooth_dual_element(m: int, seed: int, decay: float = SPECTRAL_DECAY) -> Vector:
    """Seeded unit vector whose cosine coefficients decay like k^{-decay}"""
    rng = np.random.default_rng(seed)
    k = np.arange(1, m + 1, dtype=np.float64)
    coefficients = rng.standard_normal(m) * k ** (-decay)
    lam = fft.idct(coefficients, norm='ortho')
    return lam / np.linalg.norm(lam)


def flat_dual_element(op: LinearOperator, seed: int, coefficient: float = DENSITY_COEFFICIENT) -> Vector:
    """Seeded element of Y with coefficient +-coefficient on every left singular vector of A"""
    u, _, _ = weighted_svd(op)
    rng = np.random.default_rng(seed)
    signs = rng.choice(np.array([-1.0, 1.0]), size=u.shape[1])
    return u @ (coefficient * signs)


def _normalized(op: LinearOperator) -> LinearOperator:
    top = float(singular_values(op)[0])
    if top == 0:
        raise ConstructionError(f"{op!r} is the zero operator")
    return op.scaled(1.0 / top)


def _gravity_kernel(s, t):
    return GRAVITY_DEPTH ** 2 / (2.0 * (GRAVITY_DEPTH ** 2 + (s - t) ** 2) ** 1.5)


def _density_kernel(s, t):
    return DENSITY_KERNEL_WIDTH / (np.pi * (DENSITY_KERNEL_WIDTH ** 2 + (s - t) ** 2))


def _gaussian_psf(n: int) -> tuple[Vector, int]:
    width = max(n / 40.0, 1.0)
    half = int(np.ceil(3.0 * width))
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    psf = np.exp(-offsets ** 2 / (2.0 * width ** 2))
    return psf / psf.sum(), half


def _diag_synthetic(n: int, seed: int) -> tuple[LinearOperator, Penalty, Vector]:
    op = diagonal(1.0 / np.arange(1, n + 1))
    rng = np.random.default_rng(seed)
    lam = rng.uniform(0.5, 1.5, n) * np.arange(1, n + 1) ** -0.5
    return op, make_quadratic(), lam / np.linalg.norm(lam)


def _gravity_fredholm(n: int, seed: int) -> tuple[LinearOperator, Penalty, Vector]:
    op = _normalized(build_fredholm(_gravity_kernel, n, 'midpoint'))
    return op, make_quadratic(op.domain_weights), smooth_dual_element(op.range_dim, seed)


def _deconv_nonneg(n: int, seed: int) -> tuple[LinearOperator, Penalty, Vector]:
    psf, origin = _gaussian_psf(n)
    op = _normalized(build_convolution(psf, n, 'zero_pad', origin=origin))
    return op, make_projected_quadratic(nonneg_orthant()), smooth_dual_element(op.range_dim, seed)


def _density_recovery(n: int, seed: int) -> tuple[LinearOperator, Penalty, Vector]:
    op = _normalized(build_fredholm(_density_kernel, n, 'midpoint'))
    return op, make_entropy_simplex(op.domain_weights), flat_dual_element(op, seed)


GENERATORS = {
    'diag_synthetic': (_diag_synthetic, 'diagonal operator with singular values 1/k'),
    'gravity_fredholm': (_gravity_fredholm, 'gravity-surveying Fredholm kernel, quadratic penalty'),
    'deconv_nonneg': (_deconv_nonneg, 'Gaussian-PSF deconvolution with a nonnegativity constraint'),
    'density_recovery': (_density_recovery, 'Poisson smoothing kernel on the probability simplex, entropy penalty'),
}


PROBLEM_PENALTIES = {
    'diag_synthetic': PenaltyKind.QUADRATIC,
    'gravity_fredholm': PenaltyKind.QUADRATIC,
    'deconv_nonneg': PenaltyKind.PROJECTED_QUADRATIC,
    'density_recovery': PenaltyKind.ENTROPY_SIMPLEX,
}


def default_penalty_kind(name: str) -> PenaltyKind:
    if name not in PROBLEM_PENALTIES:
        raise ConstructionError(f"Unknown problem '{name}', expected one of {problem_names()}")
    return PROBLEM_PENALTIES[name]


def problem_names() -> list[str]:
    return sorted(GENERATORS)


def describe_problems() -> list[tuple[str, str]]:
    return [(name, GENERATORS[name][1]) for name in problem_names()]


def make_problem(name: str, n: int, seed: int) -> ProblemInstance:
    """Build one of the named test problems

    Args:
        name: deconv_nonneg, gravity_fredholm, density_recovery or diag_synthetic
        n: Discretization size, at least 8
        seed: Seed of lambda_dagger

    Raises:
        ConstructionError: for an unknown name or n < 8
    """
    if name not in GENERATORS:
        raise ConstructionError(f"Unknown problem '{name}', expected one of {problem_names()}")
    if n < MIN_SIZE:
        raise ConstructionError(f"Problem size must be at least {MIN_SIZE}, got n={n}")

    build, description = GENERATORS[name]
    op, penalty, lambda_dagger = build(n, seed)
    x_true = construct_source_solution(op, penalty, lambda_dagger)
    y_exact = op.forward(x_true)
    kind = SourceKind.ENTROPIC if penalty.kind is PenaltyKind.ENTROPY_SIMPLEX else SourceKind.DUAL_ELEMENT
    logger.debug(f"Built problem {name} (n={n}, seed={seed})")
    return ProblemInstance(
        name=name, n=n, seed=seed, op=op, x_true=x_true, y_exact=y_exact,
        source=SourceSpec(kind, lambda_dagger=lambda_dagger), penalty=penalty,
        label=f"{name} n={n} seed={seed}: {description}",
    )
