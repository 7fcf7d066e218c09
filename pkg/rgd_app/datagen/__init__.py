# rgd_app/datagen/__init__.py
from .noise import (
    FAMILIES,
    N_LEVELS,
    NoiseFamily,
    NoiseSpec,
    calibrate_noise,
    family_table,
    get_family,
    lognormal_sd,
    noise_mean,
    noise_sd,
    noise_variance,
    sample_noise,
    target_sd,
)
from .synthetic import (
    InitSpec,
    SyntheticRisk,
    gen_classification,
    gen_regression,
    gen_w_star,
    random_spd,
    signal_to_noise,
    w_sequence,
)

__all__ = [
    'FAMILIES', 'N_LEVELS', 'NoiseFamily', 'NoiseSpec', 'calibrate_noise', 'family_table', 'get_family',
    'lognormal_sd', 'noise_mean', 'noise_sd', 'noise_variance', 'sample_noise', 'target_sd',
    'InitSpec', 'SyntheticRisk', 'gen_classification', 'gen_regression', 'gen_w_star', 'random_spd',
    'signal_to_noise', 'w_sequence',
]
