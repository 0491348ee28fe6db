from problems.generator import NoisyData
from problems.generator import ProblemInstance
from problems.generator import add_noise
from problems.generator import default_penalty_kind
from problems.generator import describe_problems
from problems.generator import flat_dual_element
from problems.generator import make_problem
from problems.generator import problem_names
from problems.generator import smooth_dual_element
from problems.serialization import load_problem
from problems.serialization import problem_from_dict
from problems.serialization import problem_to_dict
from problems.serialization import save_problem

__all__ = [
    'NoisyData', 'ProblemInstance', 'add_noise', 'default_penalty_kind', 'describe_problems', 'flat_dual_element',
    'make_problem', 'problem_names', 'smooth_dual_element', 'load_problem', 'problem_from_dict', 'problem_to_dict',
    'save_problem',
]
