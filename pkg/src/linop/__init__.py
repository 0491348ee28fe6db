from linop.builders import build_convolution
from linop.builders import build_fredholm
from linop.builders import diagonal
from linop.builders import from_matrix
from linop.builders import identity
from linop.operator import LinearOperator
from linop.operator import NormEstimate
from linop.operator import apply
from linop.operator import apply_adjoint
from linop.operator import estimate_l1_norm
from linop.operator import estimate_norm
from linop.operator import singular_values
from linop.operator import weighted_svd

__all__ = [
    'LinearOperator', 'NormEstimate', 'apply', 'apply_adjoint', 'estimate_norm', 'estimate_l1_norm',
    'singular_values', 'weighted_svd', 'build_fredholm', 'build_convolution', 'diagonal', 'from_matrix',
    'identity',
]
