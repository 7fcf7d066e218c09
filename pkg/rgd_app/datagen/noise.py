# rgd_app/datagen/noise.py
"""
Catálogo de familias de ruido (respaldado por scipy.stats) y calibración de
15 niveles cuya desviación típica crece linealmente de 0.3 a 20.0.

Cada familia tiene su forma fija y un parámetro calibrado: la escala (forma
cerrada, sd ∝ escala) o la log-escala de la log-normal (bisección). El ruido
muestreado se centra restando la media analítica de la distribución.
"""

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
from scipy import optimize, stats

from rgd_app.errors import InvalidConfigError

N_LEVELS = 15
SD_MIN = 0.3
SD_MAX = 20.0


@dataclass(frozen=True)
class NoiseFamily:
    """Familia de ruido: distribución de scipy.stats con formas fijas."""

    name: str
    dist: str
    shapes: Dict[str, float] = field(default_factory=dict)
    symmetric: bool = False
    finite_variance: bool = True
    short: str = ''

    def frozen(self, params):
        if self.name == 'lognormal':
            return stats.lognorm(s=params['sigma_log'], scale=math.exp(params['mean_log']))
        return getattr(stats, self.dist)(**self.shapes, loc=params.get('loc', 0.0), scale=params['scale'])


_CATALOG = [
    NoiseFamily('normal', 'norm', symmetric=True, short='norm'),
    NoiseFamily('lognormal', 'lognorm', short='lnorm'),
    NoiseFamily('loglogistic', 'fisk', {'c': 3.0}, short='llog'),
    NoiseFamily('triangular_sym', 'triang', {'c': 0.5}, symmetric=True, short='tri_s'),
    NoiseFamily('triangular_asym', 'triang', {'c': 0.2}, short='tri_a'),
    NoiseFamily('pareto', 'pareto', {'b': 3.0}, short='pareto'),
    NoiseFamily('student_t', 't', {'df': 3.0}, symmetric=True, short='t'),
    NoiseFamily('laplace', 'laplace', symmetric=True, short='lap'),
    NoiseFamily('gumbel', 'gumbel_r', short='gum'),
    NoiseFamily('weibull', 'weibull_min', {'c': 1.5}, short='weibull'),
    NoiseFamily('exponential', 'expon', short='exp'),
    NoiseFamily('logistic', 'logistic', symmetric=True, short='lgst'),
    NoiseFamily('gamma', 'gamma', {'a': 2.0}, short='gamma'),
    NoiseFamily('chisq', 'chi2', {'df': 3.0}, short='chisq'),
    NoiseFamily('rayleigh', 'rayleigh', short='rayl'),
    NoiseFamily('frechet', 'invweibull', {'c': 3.0}, short='frec'),
    NoiseFamily('arcsine', 'arcsine', short='asin'),
    NoiseFamily('semicircle', 'semicircular', symmetric=True, short='scir'),
    NoiseFamily('maxwell', 'maxwell', short='maxw'),
    NoiseFamily('wald', 'wald', short='wald'),
    NoiseFamily('hyperbolic_secant', 'hypsecant', symmetric=True, short='hsec'),
    NoiseFamily('beta_prime', 'betaprime', {'a': 2.0, 'b': 4.0}, short='bpri'),
    NoiseFamily('fisher_f', 'f', {'dfn': 5.0, 'dfd': 10.0}, short='f'),
    NoiseFamily('gompertz', 'gompertz', {'c': 1.0}, short='gomp'),
    # sin varianza finita: fuera de la escalera de sd
    NoiseFamily('pareto_heavy', 'pareto', {'b': 1.5}, finite_variance=False, short='pareto_h'),
    NoiseFamily('student_t_heavy', 't', {'df': 1.8}, symmetric=True, finite_variance=False, short='t_h'),
]

FAMILIES = {family.name: family for family in _CATALOG}
NONE_FAMILY = 'none'


def get_family(name) -> NoiseFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise InvalidConfigError(f"Familia de ruido desconocida: '{name}'", field='noise') from None


def target_sd(level) -> float:
    """sd objetivo del nivel: 0.3 + (level−1)·(20.0−0.3)/14."""
    if int(level) != level or not 1 <= int(level) <= N_LEVELS:
        raise InvalidConfigError(f"El nivel de ruido debe estar en 1..{N_LEVELS}, recibido {level}", field='level')
    return SD_MIN + (int(level) - 1) * (SD_MAX - SD_MIN) / (N_LEVELS - 1)


def lognormal_sd(sigma_log, mean_log=0.0) -> float:
    """sd de la log-normal: √((e^{σ²}−1)·e^{2μ+σ²})."""
    s2 = sigma_log * sigma_log
    return math.sqrt(math.expm1(s2) * math.exp(2.0 * mean_log + s2))


def calibrate_noise(family, level) -> dict:
    """
    Parámetros de la familia para un nivel de ruido.

    Args:
        family (str): Nombre de la familia
        level (int): Nivel 1..15

    Returns:
        dict: Parámetros ('scale' o 'mean_log'/'sigma_log')
    """
    spec = get_family(family)
    target = target_sd(level)
    if spec.name == 'normal':
        return {'loc': 0.0, 'scale': target}
    if spec.name == 'lognormal':
        sigma = optimize.bisect(lambda s: lognormal_sd(s) - target, 1e-9, 5.0, xtol=1e-15, maxiter=200)
        return {'mean_log': 0.0, 'sigma_log': float(sigma)}
    if not spec.finite_variance:
        # tabla por nivel: la escala recorre la misma escalera 0.3..20.0
        return {'scale': target}
    unit_sd = float(spec.frozen({'scale': 1.0}).std())
    return {'scale': target / unit_sd}


@dataclass(frozen=True)
class NoiseSpec:
    """
    Especificación de ruido: familia, parámetros y nivel (si está calibrada).

    Construir con NoiseSpec.calibrated(familia, nivel), NoiseSpec.explicit(familia, **params)
    o NoiseSpec.none().
    """

    family: str
    params: dict = field(default_factory=dict)
    level: int = None

    def __post_init__(self):
        if self.family == NONE_FAMILY:
            return
        spec = get_family(self.family)
        expected = {'mean_log', 'sigma_log'} if spec.name == 'lognormal' else {'scale', 'loc'}
        unknown = set(self.params) - expected
        if unknown:
            raise InvalidConfigError(
                f"Parámetros desconocidos para '{self.family}': {sorted(unknown)}", field='noise')
        if spec.name == 'lognormal':
            if not float(self.params.get('sigma_log', 0.0)) > 0:
                raise InvalidConfigError("sigma_log debe ser positivo", field='sigma_log')
            self.params.setdefault('mean_log', 0.0)
        elif not float(self.params.get('scale', 0.0)) > 0:
            raise InvalidConfigError("scale debe ser positivo", field='scale')

    @classmethod
    def calibrated(cls, family, level) -> 'NoiseSpec':
        return cls(family, calibrate_noise(family, level), int(level))

    @classmethod
    def explicit(cls, family, **params) -> 'NoiseSpec':
        return cls(family, {k: float(v) for k, v in params.items()})

    @classmethod
    def none(cls) -> 'NoiseSpec':
        return cls(NONE_FAMILY)

    @property
    def finite_variance(self) -> bool:
        return self.family == NONE_FAMILY or get_family(self.family).finite_variance

    def distribution(self):
        """Distribución congelada de scipy.stats (None para ruido nulo)."""
        if self.family == NONE_FAMILY:
            return None
        return get_family(self.family).frozen(self.params)

    @property
    def target_sd(self) -> float:
        if self.level is not None and self.finite_variance:
            return target_sd(self.level)
        return noise_sd(self)

    def label(self) -> str:
        if self.level is not None:
            return f"{self.family}-{self.level}"
        values = ','.join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return f"{self.family}({values})" if values else self.family


def noise_mean(spec: NoiseSpec) -> float:
    dist = spec.distribution()
    return 0.0 if dist is None else float(dist.mean())


def noise_variance(spec: NoiseSpec) -> float:
    """Varianza del ruido centrado (inf para las familias pesadas)."""
    dist = spec.distribution()
    if dist is None:
        return 0.0
    if not spec.finite_variance:
        return math.inf
    return float(dist.var())


def noise_sd(spec: NoiseSpec) -> float:
    return math.sqrt(noise_variance(spec))


def sample_noise(spec: NoiseSpec, size, rng: np.random.Generator) -> np.ndarray:
    """
    Muestras de ruido centrado.

    Args:
        spec: Especificación de ruido
        size: Número (o forma) de muestras
        rng: Generador con semilla

    Returns:
        np.ndarray: Ruido con media analítica cero
    """
    dist = spec.distribution()
    if dist is None:
        return np.zeros(size)
    return dist.rvs(size=size, random_state=rng) - float(dist.mean())


def family_table(family) -> list:
    """Filas (nivel, sd objetivo, parámetros) de la escalera de 15 niveles."""
    return [(level, target_sd(level), calibrate_noise(family, level)) for level in range(1, N_LEVELS + 1)]
