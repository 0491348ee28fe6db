"""Versioned JSON documents for problem instances."""

import json
import logging
from pathlib import Path

import numpy as np

from analysis.source import SourceSpec
from common.errors import ConstructionError
from linop.builders import from_matrix
from penalty.functions import make_penalty
from problems.generator import ProblemInstance

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def _floats(values) -> list:
    return np.asarray(values, dtype=np.float64).tolist()


def problem_to_dict(problem: ProblemInstance) -> dict:
    op = problem.op
    return {
        'format_version': FORMAT_VERSION,
        'name': problem.name,
        'n': problem.n,
        'seed': problem.seed,
        'label': problem.label,
        'operator': {
            'label': op.label,
            'matrix': _floats(op.to_dense()),
            'domain_weights': None if op.domain_weights is None else _floats(op.domain_weights),
        },
        'penalty': {'kind': problem.penalty.kind.value,
                    **{k: v for k, v in problem.penalty.params().items() if k != 'weights'}},
        'x_true': _floats(problem.x_true),
        'y_exact': _floats(problem.y_exact),
        'source': problem.source.to_dict(),
    }


def problem_from_dict(data: dict) -> ProblemInstance:
    version = data.get('format_version')
    if version != FORMAT_VERSION:
        raise ConstructionError(f"Unsupported problem format_version {version!r}, expected {FORMAT_VERSION}")
    try:
        operator = data['operator']
        weights = operator.get('domain_weights')
        op = from_matrix(np.array(operator['matrix'], dtype=np.float64),
                         domain_weights=None if weights is None else np.array(weights, dtype=np.float64),
                         label=operator.get('label', 'matrix'))
        penalty_data = dict(data['penalty'])
        kind = penalty_data.pop('kind')
        penalty = make_penalty(kind, op.domain_weights, **penalty_data)
        return ProblemInstance(
            name=data['name'], n=int(data['n']), seed=int(data['seed']), op=op,
            x_true=np.array(data['x_true'], dtype=np.float64),
            y_exact=np.array(data['y_exact'], dtype=np.float64),
            source=SourceSpec.from_dict(data['source']), penalty=penalty, label=data.get('label', ''),
        )
    except KeyError as e:
        raise ConstructionError(f"Problem document is missing field {e}") from e


def save_problem(problem: ProblemInstance, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(problem_to_dict(problem), f)
    logger.info(f"Saved problem {problem.name} to {path}")
    return path


def load_problem(path: str | Path) -> ProblemInstance:
    with open(path) as f:
        return problem_from_dict(json.load(f))
