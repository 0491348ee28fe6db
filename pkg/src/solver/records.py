"""Iterates and run records produced by the solvers."""

from dataclasses import dataclass
from dataclasses import field
from enum import Enum

import numpy as np

from common.vectors import Vector


class Termination(str, Enum):
    DISCREPANCY_MET = 'discrepancy_met'
    A_PRIORI_REACHED = 'a_priori_reached'
    CAP_HIT = 'cap_hit'


@dataclass(frozen=True)
class DualIterate:
    """State after n steps: lambda_n, x_n = grad R*(A* lambda_n) and its diagnostics

    ``lam`` is None for the entropic Landweber baseline, which has no dual
    variable; its ``dual_value`` is NaN.
    """
    n: int
    lam: Vector | None
    x: Vector
    residual_norm: float
    dual_value: float
    hat_lambda: Vector | None = None
    hat_x: Vector | None = None


@dataclass
class AccelState:
    """Momentum bookkeeping of the Nesterov scheme with lambda_{-1} = lambda_0"""
    lambda_prev: Vector
    lam: Vector
    alpha: float
    hat_lambda: Vector | None = None

    def extrapolation_weight(self, n: int) -> float:
        return (n - 1.0) / (n + self.alpha)

    def t(self, n: int) -> float:
        return (n + self.alpha - 1.0) / self.alpha

    def extrapolate(self, n: int) -> Vector:
        self.hat_lambda = self.lam + self.extrapolation_weight(n) * (self.lam - self.lambda_prev)
        return self.hat_lambda

    def advance(self, new_lambda: Vector) -> None:
        self.lambda_prev, self.lam = self.lam, new_lambda


@dataclass
class RunRecord:
    """Everything a solve produced

    ``residuals`` and ``dual_values`` hold one entry per iteration index
    0..stop_index regardless of thinning; ``iterates`` holds the recorded
    subset and always ends with the stopping iterate.
    """
    method: str
    iterates: list[DualIterate]
    residuals: np.ndarray
    dual_values: np.ndarray
    stop_index: int
    termination: Termination
    gamma: float
    config_echo: dict = field(default_factory=dict)
    experimental: bool = False

    @property
    def final(self) -> DualIterate:
        return self.iterates[-1]

    @property
    def x_stop(self) -> Vector:
        return self.iterates[-1].x

    @property
    def residual_at_stop(self) -> float:
        return float(self.residuals[self.stop_index])
