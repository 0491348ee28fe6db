from solver.dual_gradient import DualGradientSolver
from solver.dual_gradient import accelerated_solve
from solver.dual_gradient import dual_gradient_solve
from solver.dual_gradient import dual_objective
from solver.dual_gradient import entropic_landweber_solve
from solver.dual_gradient import primal_form_solve
from solver.records import AccelState
from solver.records import DualIterate
from solver.records import RunRecord
from solver.records import Termination
from solver.stopping import StoppingMode
from solver.stopping import StoppingRule
from solver.stopping import a_priori_iterations
from solver.stopping import check_step_size
from solver.stopping import default_step_size
from solver.stopping import discrepancy_met
from solver.stopping import lipschitz_constant

__all__ = [
    'DualGradientSolver', 'dual_gradient_solve', 'primal_form_solve', 'accelerated_solve',
    'entropic_landweber_solve', 'dual_objective', 'AccelState', 'DualIterate', 'RunRecord', 'Termination',
    'StoppingMode', 'StoppingRule', 'a_priori_iterations', 'check_step_size', 'default_step_size',
    'discrepancy_met', 'lipschitz_constant',
]
