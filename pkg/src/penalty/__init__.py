from penalty.checks import SampledCheckReport
from penalty.checks import bregman
from penalty.checks import fenchel_young_residual
from penalty.checks import lipschitz_check
from penalty.checks import strong_convexity_check
from penalty.constraints import ConstraintKind
from penalty.constraints import ConstraintSet
from penalty.constraints import box
from penalty.constraints import nonneg_orthant
from penalty.constraints import project_simplex
from penalty.constraints import simplex
from penalty.constraints import whole_space
from penalty.functions import Penalty
from penalty.functions import PenaltyKind
from penalty.functions import kullback_leibler
from penalty.functions import make_elastic_net
from penalty.functions import make_entropy_simplex
from penalty.functions import make_penalty
from penalty.functions import make_projected_quadratic
from penalty.functions import make_quadratic

__all__ = [
    'Penalty', 'PenaltyKind', 'ConstraintKind', 'ConstraintSet', 'SampledCheckReport',
    'make_quadratic', 'make_projected_quadratic', 'make_entropy_simplex', 'make_elastic_net', 'make_penalty',
    'whole_space', 'nonneg_orthant', 'box', 'simplex', 'project_simplex',
    'bregman', 'fenchel_young_residual', 'strong_convexity_check', 'lipschitz_check', 'kullback_leibler',
]
