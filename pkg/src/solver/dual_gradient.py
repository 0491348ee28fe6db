#!/usr/bin/env python3
"""
Dual gradient iterations for linear ill-posed problems

Given A: X -> Y, data y_delta and a strongly convex penalty R, the plain method
runs gradient descent on the dual function d(lambda) = R*(A* lambda) - <lambda, y_delta>:

    x_n = grad R*(A* lambda_n),  lambda_{n+1} = lambda_n - gamma (A x_n - y_delta)

The module also provides the equivalent primal update of xi_n = A* lambda_n,
the Nesterov-accelerated variant and the multiplicative entropic Landweber
baseline.
"""

import logging

import numpy as np

from common.errors import ConstructionError
from common.errors import NonFiniteIterateError
from common.errors import StoppingRuleError
from common.vectors import Vector
from common.vectors import as_vector
from common.vectors import check_dim
from linop.operator import LinearOperator
from penalty.functions import EntropySimplexPenalty
from penalty.functions import Penalty
from penalty.functions import PenaltyKind
from solver.records import AccelState
from solver.records import DualIterate
from solver.records import RunRecord
from solver.records import Termination
from solver.stopping import StoppingMode
from solver.stopping import StoppingRule
from solver.stopping import check_step_size
from solver.stopping import default_step_size
from solver.stopping import lipschitz_constant

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 3.0
PROGRESS_EVERY = 1000


class _Trace:
    """Collects per-iteration scalars and the thinned list of iterates"""

    def __init__(self, record_every: int, check_dual: bool = True):
        self.record_every = record_every
        self.check_dual = check_dual
        self.residuals: list[float] = []
        self.dual_values: list[float] = []
        self.iterates: list[DualIterate] = []

    def push(self, n: int, residual: float, dual_value: float) -> None:
        if not np.isfinite(residual) or (self.check_dual and not np.isfinite(dual_value)):
            raise NonFiniteIterateError(
                f"Non-finite iterate at n={n} (residual={residual}, dual value={dual_value})"
            )
        self.residuals.append(residual)
        self.dual_values.append(dual_value)
        if n > 0 and n % PROGRESS_EVERY == 0:
            logger.debug(f"n={n}: residual={residual:.3e}, dual value={dual_value:.6g}")

    def wants(self, n: int, termination: Termination | None) -> bool:
        return termination is not None or n % self.record_every == 0

    def keep(self, iterate: DualIterate) -> None:
        self.iterates.append(iterate)


class DualGradientSolver:
    """Runs dual gradient iterations for one operator and penalty

    Args:
        op: Forward operator
        penalty: Strongly convex penalty; its weights must match op.domain_weights
        gamma: Step size, or None for the default rule
        record_every: Keep every k-th iterate (the stopping iterate is always kept)
        allow_unproven: Run even if gamma violates the convergence hypotheses,
            marking the record experimental
        lipschitz: Precomputed L = ||A||^2 / (2 sigma); estimated when None
    """

    def __init__(self, op: LinearOperator, penalty: Penalty, gamma: float | None = None,
                 record_every: int = 1, allow_unproven: bool = False, lipschitz: float | None = None):
        if record_every < 1:
            raise ValueError(f"record_every must be at least 1, got {record_every}")
        if not penalty.matches_weights(op.domain_weights):
            raise ConstructionError("Penalty weights differ from the operator's domain weights")
        if penalty.weights is not None:
            check_dim(penalty.weights, op.domain_dim, 'penalty weights')
        self.op = op
        self.penalty = penalty
        self.gamma = gamma
        self.record_every = record_every
        self.allow_unproven = allow_unproven
        self._lipschitz = lipschitz

    @property
    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = lipschitz_constant(self.op, self.penalty)
            logger.debug(f"Lipschitz constant of the dual gradient: {self._lipschitz:.6g}")
        return self._lipschitz

    def _prepare(self, ydelta: Vector, stop: StoppingRule, method: str) -> tuple[Vector, float, bool]:
        y = as_vector(ydelta, 'ydelta')
        check_dim(y, self.op.range_dim, 'ydelta')
        entropic = self.penalty.kind is PenaltyKind.ENTROPY_SIMPLEX
        experimental = False

        gamma = self.gamma
        if gamma is None:
            gamma = default_step_size(self.lipschitz, stop, entropic=entropic)
        try:
            check_step_size(gamma, self.lipschitz, stop, entropic=entropic)
        except StoppingRuleError as e:
            if not self.allow_unproven or not gamma > 0:
                raise
            logger.warning(f"Running outside the proven parameter region: {e}")
            experimental = True

        if method == 'accelerated' and stop.mode is StoppingMode.DISCREPANCY:
            logger.warning("Accelerated iteration with the discrepancy principle has no convergence "
                           "guarantee; the record is marked experimental")
            experimental = True
        return y, float(gamma), experimental

    def _initial_lambda(self, lambda0: Vector | None) -> Vector:
        if lambda0 is None:
            return np.zeros(self.op.range_dim)
        lam = as_vector(lambda0, 'lambda0')
        check_dim(lam, self.op.range_dim, 'lambda0')
        return lam

    def _finish(self, method: str, trace: _Trace, n: int, termination: Termination, gamma: float,
                stop: StoppingRule, experimental: bool, extra: dict | None = None) -> RunRecord:
        echo = {
            'method': method,
            'gamma': gamma,
            'lipschitz': self._lipschitz,
            'stopping': stop.to_dict(),
            'penalty': {'kind': self.penalty.kind.value,
                        **{k: v for k, v in self.penalty.params().items() if k != 'weights'}},
            'record_every': self.record_every,
            'allow_unproven': self.allow_unproven,
        }
        echo.update(extra or {})
        log = logger.warning if termination is Termination.CAP_HIT else logger.info
        log(f"{method}: stopped at n={n} ({termination.value}), residual={trace.residuals[-1]:.3e}, "
            f"gamma={gamma:.4g}")
        return RunRecord(
            method=method,
            iterates=trace.iterates,
            residuals=np.array(trace.residuals),
            dual_values=np.array(trace.dual_values),
            stop_index=n,
            termination=termination,
            gamma=gamma,
            config_echo=echo,
            experimental=experimental,
        )

    def solve(self, ydelta: Vector, stop: StoppingRule, lambda0: Vector | None = None) -> RunRecord:
        """Plain dual gradient iteration starting from lambda0 (zero by default)"""
        y, gamma, experimental = self._prepare(ydelta, stop, 'plain')
        op, p = self.op, self.penalty
        trace = _Trace(self.record_every)

        lam = self._initial_lambda(lambda0)
        xi = op.adjoint(lam)
        n = 0
        while True:
            x = p.conjugate_grad(xi)
            r = op.forward(x) - y
            residual = float(np.linalg.norm(r))
            dual_value = p.conjugate_value(xi) - float(np.dot(lam, y))
            trace.push(n, residual, dual_value)
            termination = stop.check(n, residual)
            if trace.wants(n, termination):
                trace.keep(DualIterate(n, lam, x, residual, dual_value))
            if termination is not None:
                break
            lam = lam - gamma * r
            xi = op.adjoint(lam)
            n += 1

        return self._finish('plain', trace, n, termination, gamma, stop, experimental,
                            {'lambda0': 'zero' if lambda0 is None else 'given'})

    def solve_primal(self, ydelta: Vector, stop: StoppingRule, lambda0: Vector | None = None) -> RunRecord:
        """Same iteration written as xi_{n+1} = xi_n - gamma A*(A x_n - y_delta)

        lambda_n is still accumulated so that the dual value can be reported.
        """
        y, gamma, experimental = self._prepare(ydelta, stop, 'primal_form')
        op, p = self.op, self.penalty
        trace = _Trace(self.record_every)

        lam = self._initial_lambda(lambda0)
        xi = op.adjoint(lam)
        n = 0
        while True:
            x = p.conjugate_grad(xi)
            r = op.forward(x) - y
            residual = float(np.linalg.norm(r))
            dual_value = p.conjugate_value(xi) - float(np.dot(lam, y))
            trace.push(n, residual, dual_value)
            termination = stop.check(n, residual)
            if trace.wants(n, termination):
                trace.keep(DualIterate(n, lam, x, residual, dual_value))
            if termination is not None:
                break
            xi = xi - gamma * op.adjoint(r)
            lam = lam - gamma * r
            n += 1

        return self._finish('primal_form', trace, n, termination, gamma, stop, experimental,
                            {'lambda0': 'zero' if lambda0 is None else 'given'})

    def solve_accelerated(self, ydelta: Vector, stop: StoppingRule, alpha: float = DEFAULT_ALPHA,
                          lambda0: Vector | None = None) -> RunRecord:
        """Nesterov-accelerated dual gradient iteration with lambda_{-1} = lambda_0

        Each step extrapolates lambda_hat_n, takes a gradient step from it and then
        evaluates x_{n+1} = grad R*(A* lambda_{n+1}). A* lambda_hat_n is formed from
        the stored A* lambda_n and A* lambda_{n-1}, so a step costs one adjoint and
        two forward applications.
        """
        if not alpha >= 2:
            raise StoppingRuleError(f"Accelerated iteration needs alpha >= 2, got {alpha}")
        y, gamma, experimental = self._prepare(ydelta, stop, 'accelerated')
        op, p = self.op, self.penalty
        trace = _Trace(self.record_every)

        lam = self._initial_lambda(lambda0)
        state = AccelState(lambda_prev=lam, lam=lam, alpha=float(alpha))
        xi = op.adjoint(lam)
        xi_prev = xi
        hat_lambda = hat_x = None
        n = 0
        while True:
            x = p.conjugate_grad(xi)
            r = op.forward(x) - y
            residual = float(np.linalg.norm(r))
            dual_value = p.conjugate_value(xi) - float(np.dot(state.lam, y))
            trace.push(n, residual, dual_value)
            termination = stop.check(n, residual)
            if trace.wants(n, termination):
                trace.keep(DualIterate(n, state.lam, x, residual, dual_value, hat_lambda, hat_x))
            if termination is not None:
                break

            weight = state.extrapolation_weight(n)
            hat_lambda = state.extrapolate(n)
            hat_xi = xi + weight * (xi - xi_prev)
            hat_x = p.conjugate_grad(hat_xi)
            hat_r = op.forward(hat_x) - y
            state.advance(hat_lambda - gamma * hat_r)
            xi_prev, xi = xi, hat_xi - gamma * op.adjoint(hat_r)
            n += 1

        return self._finish('accelerated', trace, n, termination, gamma, stop, experimental,
                            {'alpha': float(alpha), 'lambda0': 'zero' if lambda0 is None else 'given'})


def dual_gradient_solve(op: LinearOperator, ydelta: Vector, p: Penalty, gamma: float | None,
                        stop: StoppingRule, record_every: int = 1, *, lambda0: Vector | None = None,
                        allow_unproven: bool = False, lipschitz: float | None = None) -> RunRecord:
    solver = DualGradientSolver(op, p, gamma, record_every, allow_unproven, lipschitz)
    return solver.solve(ydelta, stop, lambda0)


def primal_form_solve(op: LinearOperator, ydelta: Vector, p: Penalty, gamma: float | None,
                      stop: StoppingRule, record_every: int = 1, *, lambda0: Vector | None = None,
                      allow_unproven: bool = False, lipschitz: float | None = None) -> RunRecord:
    solver = DualGradientSolver(op, p, gamma, record_every, allow_unproven, lipschitz)
    return solver.solve_primal(ydelta, stop, lambda0)


def accelerated_solve(op: LinearOperator, ydelta: Vector, p: Penalty, gamma: float | None,
                      alpha: float, stop: StoppingRule, record_every: int = 1, *,
                      lambda0: Vector | None = None, allow_unproven: bool = False,
                      lipschitz: float | None = None) -> RunRecord:
    solver = DualGradientSolver(op, p, gamma, record_every, allow_unproven, lipschitz)
    return solver.solve_accelerated(ydelta, stop, alpha, lambda0)


def entropic_landweber_solve(op: LinearOperator, ydelta: Vector, gamma: float | None, stop: StoppingRule,
                             record_every: int = 1, *, allow_unproven: bool = False,
                             lipschitz: float | None = None) -> RunRecord:
    """Multiplicative baseline x_{n+1} ~ x_n exp(gamma A*(y_delta - A x_n))

    Starts from the uniform density and renormalizes to unit weighted mass after
    every step. Step-size defaults and checks follow the entropy penalty.
    """
    weights = op.domain_weights if op.domain_weights is not None else np.ones(op.domain_dim)
    entropy = EntropySimplexPenalty(weights)
    solver = DualGradientSolver(op, entropy, gamma, record_every, allow_unproven, lipschitz)
    y, gamma, experimental = solver._prepare(ydelta, stop, 'entropic_landweber')
    trace = _Trace(record_every, check_dual=False)

    x = np.full(op.domain_dim, 1.0 / float(np.sum(weights)))
    n = 0
    while True:
        r = op.forward(x) - y
        residual = float(np.linalg.norm(r))
        trace.push(n, residual, float('nan'))
        termination = stop.check(n, residual)
        if trace.wants(n, termination):
            trace.keep(DualIterate(n, None, x, residual, float('nan')))
        if termination is not None:
            break
        exponent = -gamma * op.adjoint(r)
        x = x * np.exp(exponent - np.max(exponent))
        mass = float(np.dot(weights, x))
        if not np.isfinite(mass) or mass <= 0:
            raise NonFiniteIterateError(f"Entropic Landweber lost its mass at n={n}")
        x = x / mass
        n += 1

    return solver._finish('entropic_landweber', trace, n, termination, gamma, stop, experimental)


def dual_objective(p: Penalty, op: LinearOperator, lam: Vector, ydelta: Vector) -> float:
    """d(lambda) = R*(A* lambda) - <lambda, y_delta>"""
    check_dim(lam, op.range_dim, 'lambda')
    check_dim(ydelta, op.range_dim, 'ydelta')
    return p.conjugate_value(op.adjoint(lam)) - float(np.dot(lam, ydelta))
