# rgd_app/optim/__init__.py
from .state import (
    STATUS_BUDGET,
    STATUS_COMPLETED,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    Constraint,
    OptimState,
    StoppingRule,
    Trajectory,
)
from .descent import (
    erm_gd_run,
    oracle_gd_run,
    reweighted_gd_run,
    reweighting_weights,
    rgd_run,
    sgd_run,
    svrg_corrected_gradient,
    svrg_run,
)
from .median import (
    block_means,
    geometric_median,
    geometric_median_objective,
    median_of_means_gd_run,
    partition_count,
)
from .regression import lad_fit, minsker_fit, ols_fit

__all__ = [
    'STATUS_BUDGET', 'STATUS_COMPLETED', 'STATUS_CONVERGED', 'STATUS_DIVERGED',
    'Constraint', 'OptimState', 'StoppingRule', 'Trajectory',
    'erm_gd_run', 'oracle_gd_run', 'reweighted_gd_run', 'reweighting_weights', 'rgd_run',
    'sgd_run', 'svrg_corrected_gradient', 'svrg_run',
    'block_means', 'geometric_median', 'geometric_median_objective', 'median_of_means_gd_run',
    'partition_count',
    'lad_fit', 'minsker_fit', 'ols_fit',
]
