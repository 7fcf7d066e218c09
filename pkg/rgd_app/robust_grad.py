# rgd_app/robust_grad.py
"""
Estimación robusta del gradiente por coordenadas.

A partir de la matriz D de gradientes por observación (n×d) se calcula, para
cada columna j: pivote γ_j (mediana o media), dispersión σ̂_j, escala s_j y la estimación
de localización θ̂_j. Incluye las variantes por subconjunto de coordenadas y
con varianza conocida, y la estimación robusta del riesgo.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from rgd_app.errors import InvalidConfigError, InvalidInputError, NonFiniteError
from rgd_app.logger_config import get_logger
from rgd_app.mest import (
    ChiFunction,
    FixedPointSettings,
    RhoFunction,
    confidence_scale,
    solve_dispersion,
    solve_location,
)

logger = get_logger('robust_grad')

PIVOTS = ('median', 'mean')


@dataclass(frozen=True)
class GradientSample:
    """Matriz n×d con los gradientes de pérdida l'_j(w; z_i) en el iterado actual."""

    rows: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.rows, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise InvalidInputError(f"GradientSample requiere n ≥ 1 y d ≥ 1, forma recibida {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise NonFiniteError("GradientSample contiene valores no finitos")
        object.__setattr__(self, 'rows', matrix)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def column_means(self) -> np.ndarray:
        return self.rows.mean(axis=0)


@dataclass(frozen=True)
class RobustConfig:
    """
    Configuración de la estimación robusta.

    Args:
        rho: Función ρ de localización
        chi: Función χ de dispersión
        delta: Confianza δ en (0, 1)
        C: Constante de la condición de Catoni (solo variante con varianza conocida)
        fp: Parámetros de punto fijo
        coordinate_subset_size: Número de coordenadas robustificadas por paso
        known_variance: Varianzas conocidas por coordenada (> 0)
        scale_refresh_every: Recalcular σ̂ cada k pasos
        batch_size: Tamaño de mini-lote por paso (None = muestra completa)
        pivot: Pivote γ_j de la dispersión, 'median' o 'mean'
    """

    rho: RhoFunction = field(default_factory=RhoFunction)
    chi: ChiFunction = field(default_factory=ChiFunction)
    delta: float = 0.005
    C: float = 2.0
    fp: FixedPointSettings = field(default_factory=FixedPointSettings)
    coordinate_subset_size: Optional[int] = None
    known_variance: Optional[np.ndarray] = None
    scale_refresh_every: int = 1
    batch_size: Optional[int] = None
    pivot: str = 'median'

    def __post_init__(self):
        if not 0.0 < float(self.delta) < 1.0:
            raise InvalidConfigError(f"delta debe estar en (0, 1), recibido {self.delta}", field='delta')
        if not float(self.C) > 0.0:
            raise InvalidConfigError(f"C debe ser positivo, recibido {self.C}", field='catoni_c')
        if self.coordinate_subset_size is not None and int(self.coordinate_subset_size) < 1:
            raise InvalidConfigError("coordinate_subset_size debe ser ≥ 1", field='coordinate_subset_size')
        if int(self.scale_refresh_every) < 1:
            raise InvalidConfigError("scale_refresh_every debe ser ≥ 1", field='scale_refresh_every')
        if self.batch_size is not None and int(self.batch_size) < 1:
            raise InvalidConfigError("batch_size debe ser ≥ 1", field='batch_size')
        if self.pivot not in PIVOTS:
            raise InvalidConfigError(f"pivot debe ser uno de {PIVOTS}, recibido '{self.pivot}'", field='pivot')
        if self.known_variance is not None:
            variance = np.asarray(self.known_variance, dtype=float).ravel()
            if not np.all(np.isfinite(variance)) or not np.all(variance > 0):
                raise InvalidConfigError("known_variance debe contener valores positivos", field='known_variance')
            object.__setattr__(self, 'known_variance', variance)

    @property
    def variant(self) -> str:
        if self.known_variance is not None:
            return 'known_variance'
        if self.coordinate_subset_size is not None:
            return 'subset'
        return 'full'

    def check_dimension(self, d: int):
        """Valida los campos que dependen de la dimensión d."""
        if self.coordinate_subset_size is not None and int(self.coordinate_subset_size) > d:
            raise InvalidConfigError(
                f"coordinate_subset_size={self.coordinate_subset_size} supera d={d}",
                field='coordinate_subset_size')
        if self.known_variance is not None and self.known_variance.shape[0] != d:
            raise InvalidConfigError(
                f"known_variance tiene {self.known_variance.shape[0]} entradas, se esperaban {d}",
                field='known_variance')


def default_robust_config(config=None, **overrides) -> RobustConfig:
    """
    Construye un RobustConfig con los valores de config.json.

    Args:
        config (dict): Configuración cargada (opcional)
        **overrides: Campos de RobustConfig a sobrescribir

    Returns:
        RobustConfig: Configuración lista para usar
    """
    from rgd_app import config_manager

    loaded = config or config_manager.load_config()
    defaults = config_manager.get_robust_defaults(loaded)
    values = {
        'rho': RhoFunction(defaults['rho']),
        'chi': ChiFunction(defaults['chi']),
        'delta': float(defaults['delta']),
        'C': float(defaults['catoni_c']),
        'fp': config_manager.get_fixed_point_settings(loaded),
        'scale_refresh_every': int(defaults['scale_refresh_every']),
        'pivot': defaults.get('pivot', 'median'),
    }
    values.update(overrides)
    return RobustConfig(**values)


@dataclass
class EstimateDiagnostics:
    """Contadores de respaldo (Brent) por columna y de estimaciones fuera de tolerancia."""

    d: int
    steps: int = 0
    location_fallbacks: np.ndarray = None
    dispersion_fallbacks: np.ndarray = None
    unconverged: int = 0

    def __post_init__(self):
        if self.location_fallbacks is None:
            self.location_fallbacks = np.zeros(self.d, dtype=int)
        if self.dispersion_fallbacks is None:
            self.dispersion_fallbacks = np.zeros(self.d, dtype=int)

    def record(self, columns, location=None, dispersion=None):
        self.steps += 1
        if location is not None:
            self.location_fallbacks[columns] += location.fallback.astype(int)
            self.unconverged += int((~location.converged).sum())
        if dispersion is not None:
            self.dispersion_fallbacks[columns] += dispersion.fallback.astype(int)

    def summary(self) -> dict:
        return {
            'steps': self.steps,
            'location_fallbacks': int(self.location_fallbacks.sum()),
            'dispersion_fallbacks': int(self.dispersion_fallbacks.sum()),
            'unconverged': self.unconverged,
        }


def _locate_columns(rows, sigma, cfg: RobustConfig):
    n = rows.shape[0]
    scales = confidence_scale(sigma, n, cfg.delta)
    return solve_location(rows, scales, cfg.rho, cfg.fp)


def pivots_for(rows, cfg: RobustConfig) -> np.ndarray:
    """Pivote γ_j por columna según cfg.pivot."""
    if cfg.pivot == 'mean':
        return rows.mean(axis=0)
    return np.median(rows, axis=0)


def _dispersion_columns(rows, cfg: RobustConfig):
    return solve_dispersion(rows, pivots_for(rows, cfg), cfg.chi, cfg.fp)


def _as_sample(D) -> GradientSample:
    return D if isinstance(D, GradientSample) else GradientSample(D)


def robust_gradient(D, cfg: RobustConfig) -> np.ndarray:
    """
    Estimación robusta de todas las coordenadas del gradiente.

    Args:
        D: GradientSample (o matriz n×d)
        cfg: Configuración robusta

    Returns:
        np.ndarray: Vector (θ̂_1, ..., θ̂_d)
    """
    sample = _as_sample(D)
    dispersion = _dispersion_columns(sample.rows, cfg)
    location = _locate_columns(sample.rows, dispersion.estimate, cfg)
    return location.estimate


def robust_gradient_subset(D, cfg: RobustConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Robustifica un subconjunto aleatorio de coordenadas y usa la media en el resto.

    Args:
        D: GradientSample (o matriz n×d)
        cfg: Configuración con coordinate_subset_size
        rng: Generador con semilla; la selección es sin reemplazo

    Returns:
        np.ndarray: Estimación del gradiente
    """
    sample = _as_sample(D)
    if cfg.coordinate_subset_size is None:
        raise InvalidConfigError("coordinate_subset_size no está definido", field='coordinate_subset_size')
    cfg.check_dimension(sample.d)
    columns = np.sort(rng.choice(sample.d, size=int(cfg.coordinate_subset_size), replace=False))
    estimate = sample.column_means()
    estimate[columns] = robust_gradient(sample.rows[:, columns], cfg)
    return estimate


def robust_gradient_known_variance(D, cfg: RobustConfig) -> np.ndarray:
    """
    Variante con varianza conocida: σ̂_j = √(C·Var_j), sin paso de dispersión.

    Args:
        D: GradientSample (o matriz n×d)
        cfg: Configuración con known_variance

    Returns:
        np.ndarray: Estimación del gradiente
    """
    sample = _as_sample(D)
    if cfg.known_variance is None:
        raise InvalidConfigError("known_variance no está definido", field='known_variance')
    cfg.check_dimension(sample.d)
    sigma = np.sqrt(cfg.C * cfg.known_variance)
    return _locate_columns(sample.rows, sigma, cfg).estimate


def robust_risk(losses, cfg: RobustConfig) -> float:
    """
    Estimación robusta del riesgo aplicando el mismo procedimiento a las pérdidas.

    Args:
        losses: Vector de n pérdidas
        cfg: Configuración robusta

    Returns:
        float: Estimación M del riesgo
    """
    values = np.asarray(losses, dtype=float).ravel()
    return float(robust_gradient(values[:, None], cfg)[0])


class RobustGradientEstimator:
    """
    Estimador con estado usado dentro de una ejecución de descenso.

    Mantiene la caché de σ̂ entre refrescos (scale_refresh_every), el generador
    para la selección de coordenadas y los diagnósticos acumulados.
    """

    def __init__(self, cfg: RobustConfig, d: int, rng: Optional[np.random.Generator] = None):
        cfg.check_dimension(d)
        self.cfg = cfg
        self.d = d
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.diagnostics = EstimateDiagnostics(d)
        self._sigma_cache = np.full(d, np.nan)
        self._step = 0

    def set_known_variance(self, variance):
        """Actualiza la varianza conocida (gancho variance_fn de la descenso)."""
        self.cfg = dataclasses.replace(self.cfg, known_variance=np.asarray(variance, dtype=float))

    def _sigma_for(self, rows, columns):
        if self._step % int(self.cfg.scale_refresh_every) == 0:
            self._sigma_cache[:] = np.nan
        sigma = self._sigma_cache[columns]
        missing = np.isnan(sigma)
        dispersion = None
        if missing.any():
            dispersion = _dispersion_columns(rows[:, missing], self.cfg)
            sigma[missing] = dispersion.estimate
            self._sigma_cache[columns[missing]] = dispersion.estimate
        return sigma, dispersion, columns[missing]

    def estimate(self, D) -> np.ndarray:
        """
        Estima el gradiente a partir de la matriz de gradientes por observación.

        Args:
            D: GradientSample (o matriz n×d)

        Returns:
            np.ndarray: Vector de d componentes
        """
        sample = _as_sample(D)
        if sample.d != self.d:
            raise InvalidInputError(f"Se esperaban {self.d} columnas, recibidas {sample.d}")

        variant = self.cfg.variant
        if variant == 'known_variance':
            columns = np.arange(self.d)
            sigma = np.sqrt(self.cfg.C * self.cfg.known_variance)
            location = _locate_columns(sample.rows, sigma, self.cfg)
            self.diagnostics.record(columns, location=location)
            self._step += 1
            return location.estimate

        if variant == 'subset':
            columns = np.sort(self.rng.choice(self.d, size=int(self.cfg.coordinate_subset_size), replace=False))
        else:
            columns = np.arange(self.d)

        rows = sample.rows[:, columns]
        sigma, dispersion, refreshed = self._sigma_for(rows, columns)
        location = _locate_columns(rows, sigma, self.cfg)

        self.diagnostics.record(columns, location=location)
        if dispersion is not None:
            self.diagnostics.dispersion_fallbacks[refreshed] += dispersion.fallback.astype(int)
        if location.any_fallback:
            logger.debug(f"Paso {self._step}: {int(location.fallback.sum())} columnas con respaldo de Brent")

        estimate = sample.column_means()
        estimate[columns] = location.estimate
        self._step += 1
        return estimate
