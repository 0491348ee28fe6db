from analysis.eta import EtaEstimate
from analysis.eta import apriori_eta_constant
from analysis.eta import discrepancy_constant
from analysis.eta import discrepancy_lower_bound
from analysis.eta import eta_oracle
from analysis.measures import Measure
from analysis.measures import error_measure
from analysis.measures import kl_l1_bound_check
from analysis.rates import RateFit
from analysis.rates import RatePoint
from analysis.rates import fit_rate
from analysis.rates import fit_rate_study
from analysis.rates import loglog_slope
from analysis.rates import median_points
from analysis.source import SourceKind
from analysis.source import SourceSpec
from analysis.source import VariationalReport
from analysis.source import construct_projected_power_solution
from analysis.source import construct_source_solution
from analysis.source import fractional_power
from analysis.source import is_certified
from analysis.source import projected_source_constant
from analysis.source import projected_source_parameters
from analysis.source import source_certificate
from analysis.source import variational_sc_margin

__all__ = [
    'EtaEstimate', 'eta_oracle', 'discrepancy_constant', 'discrepancy_lower_bound', 'apriori_eta_constant',
    'Measure', 'error_measure', 'kl_l1_bound_check', 'RateFit', 'RatePoint', 'fit_rate', 'fit_rate_study',
    'loglog_slope', 'median_points', 'SourceKind', 'SourceSpec', 'VariationalReport',
    'construct_source_solution', 'construct_projected_power_solution', 'fractional_power', 'is_certified',
    'projected_source_constant', 'projected_source_parameters', 'source_certificate', 'variational_sc_margin',
]
