# rgd_app/bench/concentration.py
"""
Comprobación Monte-Carlo de la concentración de la estimación M de localización.

Cada repetición estima la media de una muestra de tamaño n con la escala
s = σ̂·√(n/log(2/δ)) y comprueba la cota ½|θ̂ − μ| ≤ C·Var/s + s·log(2/δ)/n.
Con ρ cuadrática (la media muestral) se usa la cota de Chebyshev √(Var/(nδ)).
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from rgd_app.datagen.noise import NoiseSpec, noise_variance, sample_noise
from rgd_app.errors import InvalidInputError
from rgd_app.logger_config import get_logger
from rgd_app.mest import confidence_scale, solve_dispersion, solve_location
from rgd_app.robust_grad import RobustConfig, pivots_for

logger = get_logger('bench.concentration')


@dataclass
class ConcentrationResult:
    violation_rate: float
    violations: int
    trials: int
    sufficient: bool
    threshold: float
    message: str = ''


def sufficient_sample_size(C, delta, variance_ratio=1.0) -> float:
    """
    Tamaño muestral a partir del cual 1/4 ≥ (C·log(2/δ)/n)·(1 + C·Var/σ̂²).

    Args:
        C: Constante de la condición de Catoni
        delta: Confianza δ
        variance_ratio: Var/σ̂² supuesto (1 por defecto)

    Returns:
        float: n mínimo
    """
    return 4.0 * C * math.log(2.0 / delta) * (1.0 + C * variance_ratio)


def concentration_check(sampler: Callable, mean: float, variance: float, n: int, delta: float,
                        trials: int, rng: np.random.Generator, cfg: RobustConfig = None) -> ConcentrationResult:
    """
    Fracción de repeticiones que violan la cota de concentración.

    Args:
        sampler: Función (size, rng) -> muestras
        mean: Media verdadera de la distribución
        variance: Varianza verdadera (finita)
        n: Tamaño de cada muestra
        delta: Confianza δ
        trials: Número de repeticiones independientes
        rng: Generador con semilla
        cfg: Configuración robusta (ρ, χ, C, punto fijo)

    Returns:
        ConcentrationResult: tasa de violación o resultado marcado si n es insuficiente
    """
    cfg = cfg or RobustConfig(delta=delta)
    if int(n) < 1 or int(trials) < 1:
        raise InvalidInputError("n y trials deben ser ≥ 1")
    if not 0.0 < float(delta) < 1.0:
        raise InvalidInputError(f"delta debe estar en (0, 1), recibido {delta}")
    if not math.isfinite(variance) or variance <= 0:
        raise InvalidInputError("La comprobación requiere una varianza finita y positiva")

    quadratic = not cfg.rho.is_bounded
    threshold = 0.0 if quadratic else sufficient_sample_size(cfg.C, delta)
    if int(n) < threshold:
        message = f"n={n} por debajo del umbral de suficiencia {threshold:.1f}; cota no garantizada"
        logger.info(message)
        return ConcentrationResult(math.nan, 0, int(trials), False, threshold, message)

    # columnas independientes: una repetición por columna
    samples = np.asarray(sampler((int(n), int(trials)), rng), dtype=float)
    if quadratic:
        estimates = samples.mean(axis=0)
        bound = math.sqrt(variance / (int(n) * delta))
        violated = np.abs(estimates - mean) > bound
    else:
        sigma = solve_dispersion(samples, pivots_for(samples, cfg), cfg.chi, cfg.fp).estimate
        scales = confidence_scale(sigma, int(n), delta)
        estimates = solve_location(samples, scales, cfg.rho, cfg.fp).estimate
        log_term = math.log(2.0 / delta)
        bound = 2.0 * (cfg.C * variance / scales + scales * log_term / int(n))
        violated = np.abs(estimates - mean) > bound

    violations = int(violated.sum())
    return ConcentrationResult(violations / int(trials), violations, int(trials), True, threshold)


def noise_concentration_check(spec: NoiseSpec, n, delta, trials, rng, cfg: RobustConfig = None) -> ConcentrationResult:
    """concentration_check sobre el ruido centrado de una NoiseSpec (media 0)."""
    return concentration_check(lambda size, g: sample_noise(spec, size, g), 0.0, noise_variance(spec),
                               n, delta, trials, rng, cfg)
