from experiments.config import ExperimentConfig
from experiments.config import load_config
from experiments.config import parse_config
from experiments.runner import ExperimentRunner
from experiments.runner import StudyResult
from experiments.runner import run_comparison

__all__ = ['ExperimentConfig', 'ExperimentRunner', 'StudyResult', 'load_config', 'parse_config', 'run_comparison']
