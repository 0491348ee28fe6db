#!/usr/bin/env python3
"""
Stopping rules and step-size hypotheses

A run stops either after an a-priori number of steps n_delta ~ delta^(q-2)
or at the first index whose residual satisfies ||A x_n - y_delta|| <= tau * delta.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

from common.errors import StoppingRuleError
from linop.operator import LinearOperator
from linop.operator import estimate_l1_norm
from linop.operator import estimate_norm
from penalty.functions import Penalty
from solver.records import Termination

logger = logging.getLogger(__name__)

DEFAULT_TAU = 1.5
DEFAULT_N_CAP = 10 ** 6
NORM_SAFETY = 1.05


class StoppingMode(str, Enum):
    A_PRIORI = 'a_priori'
    DISCREPANCY = 'discrepancy'


@dataclass(frozen=True)
class StoppingRule:
    """When to stop a dual gradient run

    Use the ``a_priori``, ``a_priori_from_delta`` and ``discrepancy`` constructors.
    """
    mode: StoppingMode
    n_max: int | None = None
    tau: float | None = None
    delta: float | None = None
    n_cap: int = DEFAULT_N_CAP
    q: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.mode is StoppingMode.A_PRIORI:
            if self.n_max is None or self.n_max < 0:
                raise StoppingRuleError(f"A-priori rule needs n_max >= 0, got {self.n_max}")
        else:
            if self.tau is None or not self.tau > 1:
                raise StoppingRuleError(f"Discrepancy principle needs tau > 1, got {self.tau}")
            if self.delta is None or self.delta < 0:
                raise StoppingRuleError(f"Noise level must be nonnegative, got {self.delta}")
            if self.n_cap < 1:
                raise StoppingRuleError(f"n_cap must be positive, got {self.n_cap}")

    @classmethod
    def a_priori(cls, n_max: int) -> 'StoppingRule':
        return cls(StoppingMode.A_PRIORI, n_max=int(n_max))

    @classmethod
    def a_priori_from_delta(cls, delta: float, q: float = 1.0, scale: float = 1.0,
                            accelerated: bool = False) -> 'StoppingRule':
        n_max = a_priori_iterations(delta, q, scale, accelerated=accelerated)
        return cls(StoppingMode.A_PRIORI, n_max=n_max, delta=delta, q=q, scale=scale)

    @classmethod
    def discrepancy(cls, tau: float, delta: float, n_cap: int = DEFAULT_N_CAP) -> 'StoppingRule':
        return cls(StoppingMode.DISCREPANCY, tau=float(tau), delta=float(delta), n_cap=int(n_cap))

    @property
    def max_iterations(self) -> int:
        return self.n_max if self.mode is StoppingMode.A_PRIORI else self.n_cap

    def check(self, n: int, residual_norm: float) -> Termination | None:
        """Termination reason at index n, or None to keep iterating"""
        if self.mode is StoppingMode.A_PRIORI:
            return Termination.A_PRIORI_REACHED if n >= self.n_max else None
        if residual_norm <= self.tau * self.delta:
            return Termination.DISCREPANCY_MET
        if n >= self.n_cap:
            return Termination.CAP_HIT
        return None

    def to_dict(self) -> dict:
        data = {'mode': self.mode.value}
        if self.mode is StoppingMode.A_PRIORI:
            data.update(n_max=self.n_max, q=self.q, scale=self.scale)
            if self.delta is not None:
                data['delta'] = self.delta
        else:
            data.update(tau=self.tau, delta=self.delta, n_cap=self.n_cap)
        return data


def discrepancy_met(residual_norm: float, tau: float, delta: float) -> bool:
    if not tau > 1:
        raise StoppingRuleError(f"Discrepancy principle needs tau > 1, got {tau}")
    if delta < 0:
        raise StoppingRuleError(f"Noise level must be nonnegative, got {delta}")
    return residual_norm <= tau * delta


def a_priori_iterations(delta: float, q: float = 1.0, scale: float = 1.0, accelerated: bool = False,
                        exponent: float | None = None) -> int:
    """Iteration count ceil(scale * delta^(q-2)), or ceil(scale * delta^(-1/2)) when accelerated

    Args:
        delta: Noise level, must be positive
        q: Source exponent in (0, 1]
        scale: Positive multiplier
        accelerated: Use the accelerated exponent -1/2
        exponent: Explicit exponent overriding both q and accelerated

    Returns:
        Number of iterations, at least 1
    """
    if not delta > 0:
        raise StoppingRuleError(f"A-priori stopping needs delta > 0, got {delta}")
    if not scale > 0:
        raise StoppingRuleError(f"scale must be positive, got {scale}")
    if exponent is None:
        if accelerated:
            exponent = -0.5
        else:
            if not 0 < q <= 1:
                raise StoppingRuleError(f"q must lie in (0, 1], got {q}")
            exponent = q - 2.0
    # round away float noise such as 100.00000000000001 before taking the ceiling
    value = round(scale * delta ** exponent, 9)
    return max(1, math.ceil(value))


def lipschitz_constant(op: LinearOperator, p: Penalty, safety: float = NORM_SAFETY,
                       op_norm: float | None = None) -> float:
    """L = ||A||^2 / (2 sigma) with the norm taken in the penalty's convexity norm

    The power-method estimate is inflated by ``safety`` since it approaches
    ||A|| from below.
    """
    if op_norm is None:
        op_norm = estimate_l1_norm(op) if p.norm_kind == 'l1' else estimate_norm(op).value
    return p.lipschitz_constant(safety * op_norm)


def _discrepancy_margin(tau: float, entropic: bool) -> float:
    margin = min(1.0 - 1.0 / tau, 1.0 - 1.0 / tau ** 2)
    if entropic:
        margin = min(margin, 1.0 - 2.0 / tau)
    return margin


def default_step_size(lipschitz: float, stop: StoppingRule, entropic: bool = False) -> float:
    """Default gamma

    1/L for a-priori runs and 0.5 (1 - 1/tau^2) / L for the discrepancy principle,
    which also keeps 1 - 1/tau - L*gamma positive. Entropic runs cap the margin
    at 1 - 2/tau.
    """
    if stop.mode is StoppingMode.A_PRIORI:
        return 1.0 / lipschitz
    margin = 1.0 - 1.0 / stop.tau ** 2
    if entropic:
        margin = min(margin, 1.0 - 2.0 / stop.tau)
    if margin <= 0:
        raise StoppingRuleError(f"tau={stop.tau} leaves no admissible step size")
    return 0.5 * margin / lipschitz


def check_step_size(gamma: float, lipschitz: float, stop: StoppingRule, entropic: bool = False) -> None:
    """Raise StoppingRuleError unless gamma satisfies the convergence hypotheses

    A-priori runs need 0 < gamma <= 1/L. Discrepancy runs need
    1 - 1/tau - L*gamma > 0 and 1 - 1/tau^2 - L*gamma > 0; entropic runs
    additionally need 1 - 2/tau - L*gamma > 0.
    """
    if not gamma > 0 or not math.isfinite(gamma):
        raise StoppingRuleError(f"Step size must be positive and finite, got {gamma}")
    if stop.mode is StoppingMode.A_PRIORI:
        if gamma * lipschitz > 1.0 + 1e-12:
            raise StoppingRuleError(f"gamma={gamma:.6g} exceeds 1/L={1.0 / lipschitz:.6g}")
        return
    margin = _discrepancy_margin(stop.tau, entropic)
    if not margin - lipschitz * gamma > 0:
        needed = 'tau > 2 and ' if entropic and stop.tau <= 2 else ''
        raise StoppingRuleError(
            f"gamma={gamma:.6g} with tau={stop.tau} violates the discrepancy hypothesis "
            f"({needed}L*gamma < {margin:.6g}, L={lipschitz:.6g})"
        )
