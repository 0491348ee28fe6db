#!/usr/bin/env python3
"""
Experiment configuration: a JSON tree validated into frozen dataclasses

Validation errors name the offending field, e.g. ``stopping.tau`` or ``deltas[2]``.
"""

import hashlib
import json
import logging
import numbers
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from pathlib import Path

from analysis.measures import Measure
from common.errors import ConfigError
from penalty.functions import PenaltyKind
from problems.generator import MIN_SIZE
from problems.generator import default_penalty_kind
from problems.generator import problem_names
from solver.dual_gradient import DEFAULT_ALPHA
from solver.stopping import DEFAULT_N_CAP
from solver.stopping import DEFAULT_TAU
from solver.stopping import StoppingMode

logger = logging.getLogger(__name__)

METHODS = ('plain', 'accelerated', 'entropic_landweber')
TOP_LEVEL_FIELDS = {
    'problem', 'penalty', 'method', 'alpha', 'stopping', 'gamma', 'deltas', 'seeds_per_delta',
    'measures', 'output_dir', 'record_every', 'allow_unproven',
}
# execution details that do not change any number in the outputs
UNHASHED_FIELDS = ('output_dir',)


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    n: int
    seed: int = 0


@dataclass(frozen=True)
class PenaltyConfig:
    kind: PenaltyKind
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StoppingConfig:
    mode: StoppingMode
    tau: float = DEFAULT_TAU
    q: float = 1.0
    scale: float = 1.0
    n_cap: int = DEFAULT_N_CAP
    n_max: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment"""
    problem: ProblemConfig
    penalty: PenaltyConfig
    method: str
    stopping: StoppingConfig
    gamma: float | None
    deltas: tuple[float, ...]
    seeds_per_delta: int = 1
    measures: tuple[Measure, ...] = (Measure.NORM,)
    output_dir: str = 'results'
    alpha: float = DEFAULT_ALPHA
    record_every: int = 1
    allow_unproven: bool = False
    penalty_is_default: bool = True

    def to_dict(self) -> dict:
        """Canonical tree with every default filled in"""
        stopping = {'mode': self.stopping.mode.value}
        if self.stopping.mode is StoppingMode.DISCREPANCY:
            stopping.update(tau=self.stopping.tau, n_cap=self.stopping.n_cap)
        else:
            stopping.update(q=self.stopping.q, scale=self.stopping.scale, n_max=self.stopping.n_max)
        return {
            'problem': {'name': self.problem.name, 'n': self.problem.n, 'seed': self.problem.seed},
            'penalty': {'kind': self.penalty.kind.value, **self.penalty.params},
            'method': self.method,
            'alpha': self.alpha,
            'stopping': stopping,
            'gamma': 'auto' if self.gamma is None else self.gamma,
            'deltas': list(self.deltas),
            'seeds_per_delta': self.seeds_per_delta,
            'measures': [m.value for m in self.measures],
            'output_dir': self.output_dir,
            'record_every': self.record_every,
            'allow_unproven': self.allow_unproven,
        }

    @property
    def config_hash(self) -> str:
        tree = {k: v for k, v in self.to_dict().items() if k not in UNHASHED_FIELDS}
        canonical = json.dumps(tree, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]

    def with_overrides(self, **changes) -> 'ExperimentConfig':
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _is_int(value) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def _require_int(tree: dict, key: str, path: str, default=None, minimum: int | None = None) -> int:
    value = tree.get(key, default)
    if value is None or not _is_int(value):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {value}")
    return int(value)


def _require_real(tree: dict, key: str, path: str, default=None) -> float:
    value = tree.get(key, default)
    if value is None or not _is_real(value):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _require_mapping(tree: dict, key: str, required: bool = True) -> dict:
    value = tree.get(key)
    if value is None and not required:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(key, f"expected an object, got {value!r}")
    return value


def _parse_problem(tree: dict) -> ProblemConfig:
    node = _require_mapping(tree, 'problem')
    name = node.get('name')
    if name not in problem_names():
        raise ConfigError('problem.name', f"unknown problem {name!r}, expected one of {problem_names()}")
    n = _require_int(node, 'n', 'problem.n', minimum=MIN_SIZE)
    seed = _require_int(node, 'seed', 'problem.seed', default=0, minimum=0)
    return ProblemConfig(name=name, n=n, seed=seed)


def _parse_penalty(tree: dict, problem: ProblemConfig) -> tuple[PenaltyConfig, bool]:
    node = dict(_require_mapping(tree, 'penalty', required=False))
    default_kind = default_penalty_kind(problem.name)
    kind_name = node.pop('kind', default_kind.value)
    try:
        kind = PenaltyKind(kind_name)
    except ValueError:
        raise ConfigError('penalty.kind', f"unknown penalty {kind_name!r}, "
                                          f"expected one of {[k.value for k in PenaltyKind]}") from None
    if kind is PenaltyKind.ELASTIC_NET:
        alpha = _require_real(node, 'alpha', 'penalty.alpha', default=1.0)
        beta = _require_real(node, 'beta', 'penalty.beta', default=0.0)
        if not alpha > 0:
            raise ConfigError('penalty.alpha', f"must be positive, got {alpha}")
        if not beta >= 0:
            raise ConfigError('penalty.beta', f"must be nonnegative, got {beta}")
        node.update(alpha=alpha, beta=beta)
    elif kind is PenaltyKind.PROJECTED_QUADRATIC:
        constraint = node.get('constraint', 'nonneg_orthant')
        constraint_kind = constraint.get('kind') if isinstance(constraint, dict) else constraint
        if constraint_kind not in ('whole_space', 'nonneg_orthant', 'box', 'simplex'):
            raise ConfigError('penalty.constraint', f"unknown constraint {constraint_kind!r}")
        has_bounds = isinstance(constraint, dict) and 'lo' in constraint and 'hi' in constraint
        if constraint_kind == 'box' and not has_bounds:
            raise ConfigError('penalty.constraint', "a box constraint needs 'lo' and 'hi'")
        node['constraint'] = constraint
    allowed = {PenaltyKind.ELASTIC_NET: {'alpha', 'beta'}, PenaltyKind.PROJECTED_QUADRATIC: {'constraint'}}
    unknown = set(node) - allowed.get(kind, set())
    if unknown:
        raise ConfigError(f"penalty.{sorted(unknown)[0]}", "unknown field")
    is_default = kind is default_kind
    if kind is PenaltyKind.PROJECTED_QUADRATIC:
        is_default = is_default and constraint_kind == 'nonneg_orthant'
    return PenaltyConfig(kind=kind, params=node), is_default


def _parse_stopping(tree: dict) -> StoppingConfig:
    node = _require_mapping(tree, 'stopping')
    mode_name = node.get('mode', StoppingMode.DISCREPANCY.value)
    try:
        mode = StoppingMode(mode_name)
    except ValueError:
        raise ConfigError('stopping.mode', f"expected 'discrepancy' or 'a_priori', got {mode_name!r}") from None

    tau = _require_real(node, 'tau', 'stopping.tau', default=DEFAULT_TAU)
    if not tau > 1:
        raise ConfigError('stopping.tau', f"the discrepancy principle needs tau > 1, got {tau}")
    q = _require_real(node, 'q', 'stopping.q', default=1.0)
    if not 0 < q <= 1:
        raise ConfigError('stopping.q', f"must lie in (0, 1], got {q}")
    scale = _require_real(node, 'scale', 'stopping.scale', default=1.0)
    if not scale > 0:
        raise ConfigError('stopping.scale', f"must be positive, got {scale}")
    n_cap = _require_int(node, 'n_cap', 'stopping.n_cap', default=DEFAULT_N_CAP, minimum=1)
    n_max = None
    if node.get('n_max') is not None:
        n_max = _require_int(node, 'n_max', 'stopping.n_max', minimum=0)
    return StoppingConfig(mode=mode, tau=tau, q=q, scale=scale, n_cap=n_cap, n_max=n_max)


def _parse_deltas(tree: dict, stopping: StoppingConfig) -> tuple[float, ...]:
    deltas = tree.get('deltas')
    if not isinstance(deltas, list) or not deltas:
        raise ConfigError('deltas', f"expected a non-empty list of noise levels, got {deltas!r}")
    values = []
    for i, delta in enumerate(deltas):
        if not _is_real(delta):
            raise ConfigError(f"deltas[{i}]", f"expected a number, got {delta!r}")
        noise_free_allowed = stopping.mode is StoppingMode.A_PRIORI and stopping.n_max is not None
        if delta < 0 or (delta == 0 and not noise_free_allowed):
            raise ConfigError(f"deltas[{i}]", f"must be positive, got {delta}")
        if values and not delta < values[-1]:
            raise ConfigError(f"deltas[{i}]", "deltas must be strictly decreasing")
        values.append(float(delta))
    return tuple(values)


def _parse_measures(tree: dict, penalty: PenaltyConfig, penalty_is_default: bool) -> tuple[Measure, ...]:
    raw = tree.get('measures', ['norm'])
    if not isinstance(raw, list) or not raw:
        raise ConfigError('measures', f"expected a non-empty list, got {raw!r}")
    measures = []
    for i, name in enumerate(raw):
        try:
            measure = Measure(name)
        except ValueError:
            raise ConfigError(f"measures[{i}]", f"unknown measure {name!r}, "
                                                f"expected one of {[m.value for m in Measure]}") from None
        if measure is Measure.BREGMAN and not penalty_is_default:
            raise ConfigError(f"measures[{i}]", "the Bregman distance needs the problem's own penalty")
        if measure is Measure.KL and penalty.kind is not PenaltyKind.ENTROPY_SIMPLEX:
            raise ConfigError(f"measures[{i}]", "the kl measure needs the entropy_simplex penalty")
        if measure not in measures:
            measures.append(measure)
    return tuple(measures)


def parse_config(tree: dict) -> ExperimentConfig:
    """Validate a configuration tree

    Raises:
        ConfigError: naming the first invalid field
    """
    if not isinstance(tree, dict):
        raise ConfigError('<root>', "configuration must be a JSON object")
    unknown = set(tree) - TOP_LEVEL_FIELDS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")

    problem = _parse_problem(tree)
    penalty, penalty_is_default = _parse_penalty(tree, problem)

    method = tree.get('method', 'plain')
    if method not in METHODS:
        raise ConfigError('method', f"expected one of {list(METHODS)}, got {method!r}")
    if method == 'entropic_landweber' and penalty.kind is not PenaltyKind.ENTROPY_SIMPLEX:
        raise ConfigError('method', "entropic_landweber needs the entropy_simplex penalty")
    alpha = _require_real(tree, 'alpha', 'alpha', default=DEFAULT_ALPHA)
    if not alpha >= 2:
        raise ConfigError('alpha', f"the accelerated scheme needs alpha >= 2, got {alpha}")

    stopping = _parse_stopping(tree)
    allow_unproven = tree.get('allow_unproven', False)
    if not isinstance(allow_unproven, bool):
        raise ConfigError('allow_unproven', f"expected true or false, got {allow_unproven!r}")
    entropic = penalty.kind is PenaltyKind.ENTROPY_SIMPLEX
    if entropic and stopping.mode is StoppingMode.DISCREPANCY and stopping.tau <= 2 and not allow_unproven:
        raise ConfigError('stopping.tau', f"the entropy penalty needs tau > 2, got {stopping.tau}")

    gamma = tree.get('gamma', 'auto')
    if gamma == 'auto':
        gamma = None
    elif not _is_real(gamma) or not gamma > 0:
        raise ConfigError('gamma', f"expected 'auto' or a positive number, got {gamma!r}")
    else:
        gamma = float(gamma)

    output_dir = tree.get('output_dir', 'results')
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError('output_dir', f"expected a path, got {output_dir!r}")

    return ExperimentConfig(
        problem=problem,
        penalty=penalty,
        method=method,
        stopping=stopping,
        gamma=gamma,
        deltas=_parse_deltas(tree, stopping),
        seeds_per_delta=_require_int(tree, 'seeds_per_delta', 'seeds_per_delta', default=1, minimum=1),
        measures=_parse_measures(tree, penalty, penalty_is_default),
        output_dir=output_dir,
        alpha=alpha,
        record_every=_require_int(tree, 'record_every', 'record_every', default=1, minimum=1),
        allow_unproven=allow_unproven,
        penalty_is_default=penalty_is_default,
    )


def load_config(config_path: str | Path) -> ExperimentConfig:
    """Load and validate an experiment configuration from a JSON file"""
    try:
        with open(config_path) as f:
            tree = json.load(f)
    except FileNotFoundError:
        raise ConfigError('<file>', f"configuration file {config_path} not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError('<file>', f"{config_path} is not valid JSON ({e})") from None
    config = parse_config(tree)
    logger.info(f"Loaded config {config_path} (hash {config.config_hash})")
    return config
