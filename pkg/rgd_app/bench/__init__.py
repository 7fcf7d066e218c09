# rgd_app/bench/__init__.py
from .concentration import ConcentrationResult, concentration_check, noise_concentration_check, sufficient_sample_size
from .config_loader import (
    TASK_METHODS,
    ExperimentConfig,
    load_experiment_config,
    parse_experiment_config,
    parse_noise,
    with_overrides,
)
from .experiment import (
    ExperimentResult,
    TrialResult,
    classification_settings,
    derived_rng,
    run_experiment,
    run_trial,
    synthetic_conditions,
)
from .metrics import RESULT_COLUMNS, aggregate, excess_rmse, results_frame, rmse, select_top_settings

__all__ = [
    'ConcentrationResult', 'concentration_check', 'noise_concentration_check', 'sufficient_sample_size',
    'TASK_METHODS', 'ExperimentConfig', 'load_experiment_config', 'parse_experiment_config', 'parse_noise',
    'with_overrides',
    'ExperimentResult', 'TrialResult', 'classification_settings', 'derived_rng', 'run_experiment', 'run_trial',
    'synthetic_conditions',
    'RESULT_COLUMNS', 'aggregate', 'excess_rmse', 'results_frame', 'rmse', 'select_top_settings',
]
