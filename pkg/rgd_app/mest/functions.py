# rgd_app/mest/functions.py
"""
Familia de funciones para M-estimación: ρ/ψ para localización y χ para dispersión.
Todas las evaluaciones son mapas escalares puros vectorizados con numpy.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from rgd_app.errors import InvalidConfigError

RHO_KINDS = ('gudermannian', 'log_cosh', 'pseudo_huber', 'quadratic_test_only')
CHI_KINDS = ('geman_quadratic',)

HALF_PI = math.pi / 2.0

# Paneles de Gauss-Legendre para la integral de la Gudermanniana
_GD_TAIL_START = 36
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _gudermannian(u):
    return 2.0 * np.arctan(np.tanh(0.5 * u))


def _panel_integral(lo, hi):
    """Integral de gd sobre [lo, hi] con 20 nodos de Gauss-Legendre (vectorizado)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[..., None] + half[..., None] * _GL_NODES
    return half * np.sum(_GL_WEIGHTS * _gudermannian(t), axis=-1)


@lru_cache(maxsize=1)
def _gudermannian_cumulative():
    """ρ(k) para k = 0, 1, ..., 36 (integrales acumuladas por paneles unitarios)."""
    starts = np.arange(_GD_TAIL_START, dtype=float)
    panels = _panel_integral(starts, starts + 1.0)
    return np.concatenate([[0.0], np.cumsum(panels)])


def _gudermannian_rho(u):
    a = np.abs(np.asarray(u, dtype=float))
    head = np.minimum(a, float(_GD_TAIL_START))
    k = np.floor(head)
    k = np.minimum(k, _GD_TAIL_START - 1)
    cumulative = _gudermannian_cumulative()
    value = cumulative[k.astype(int)] + _panel_integral(k, head)
    return value + HALF_PI * (a - head)


@dataclass(frozen=True)
class RhoFunction:
    """
    Función ρ de la clase de localización (par, ρ(0)=0) junto con ψ=ρ' y ψ'.

    Tipos soportados:
    - gudermannian: ψ(u) = 2·atan(exp(u)) − π/2
    - log_cosh: ρ(u) = log cosh(u), ψ = tanh
    - pseudo_huber: ρ(u) = 2(√(1+u²/2) − 1)
    - quadratic_test_only: ρ(u) = u²/2, ψ(u) = u (solo pruebas; reduce a la media)
    """

    kind: str = 'gudermannian'

    def __post_init__(self):
        if self.kind not in RHO_KINDS:
            raise InvalidConfigError(f"Tipo de ρ desconocido: '{self.kind}'", field='rho')

    @property
    def is_bounded(self) -> bool:
        """True si ψ es acotada (los tres tipos robustos)."""
        return self.kind != 'quadratic_test_only'

    @property
    def psi_bound(self) -> float:
        """Cota superior de |ψ|."""
        return {
            'gudermannian': HALF_PI,
            'log_cosh': 1.0,
            'pseudo_huber': math.sqrt(2.0),
            'quadratic_test_only': math.inf,
        }[self.kind]

    def rho(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == 'gudermannian':
            return _gudermannian_rho(u)
        if self.kind == 'log_cosh':
            a = np.abs(u)
            return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)
        if self.kind == 'pseudo_huber':
            return 2.0 * (np.sqrt(1.0 + 0.5 * u * u) - 1.0)
        return 0.5 * u * u

    def psi(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == 'gudermannian':
            return _gudermannian(u)
        if self.kind == 'log_cosh':
            return np.tanh(u)
        if self.kind == 'pseudo_huber':
            return u / np.sqrt(1.0 + 0.5 * u * u)
        return u

    def psi_prime(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == 'gudermannian':
            e = np.exp(-np.abs(u))
            return 2.0 * e / (1.0 + e * e)
        if self.kind == 'log_cosh':
            t = np.tanh(u)
            return 1.0 - t * t
        if self.kind == 'pseudo_huber':
            return (1.0 + 0.5 * u * u) ** -1.5
        return np.ones_like(u)


@lru_cache(maxsize=1)
def geman_center() -> float:
    """
    Constante c = E[u²/(1+u²)] bajo N(0,1), calculada por integración numérica.

    Returns:
        float: c ≈ 0.34
    """
    def integrand(u):
        return u * u / (1.0 + u * u) * math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)

    value, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-13)
    return float(value)


@dataclass(frozen=True)
class ChiFunction:
    """
    Función χ para la estimación de dispersión: χ(u) = u²/(1+u²) − c.
    Par, χ(0) = −c < 0 y χ(u) → 1 − c > 0 cuando |u| → ∞.
    """

    kind: str = 'geman_quadratic'
    c: float = None

    def __post_init__(self):
        if self.kind not in CHI_KINDS:
            raise InvalidConfigError(f"Tipo de χ desconocido: '{self.kind}'", field='chi')
        if self.c is None:
            object.__setattr__(self, 'c', geman_center())
        if not 0.0 < self.c < 1.0:
            raise InvalidConfigError(f"La constante c debe estar en (0, 1), recibido {self.c}", field='chi')

    @property
    def at_zero(self) -> float:
        return -self.c

    def chi(self, u):
        u = np.asarray(u, dtype=float)
        u2 = u * u
        return u2 / (1.0 + u2) - self.c

    def chi_prime(self, u):
        u = np.asarray(u, dtype=float)
        return 2.0 * u / (1.0 + u * u) ** 2


@dataclass(frozen=True)
class FixedPointSettings:
    """
    Parámetros de las iteraciones de punto fijo.

    Args:
        max_iters: Número máximo de iteraciones (≥ 1)
        rel_tolerance: Tolerancia del residuo, escalada por n (> 0)
        sigma_floor: Base relativa del piso de dispersión; el piso efectivo es
            sigma_floor·(1 + |pivote|)
    """

    max_iters: int = 50
    rel_tolerance: float = 1e-8
    sigma_floor: float = 1e-12

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise InvalidConfigError("max_iters debe ser ≥ 1", field='fixed_point.max_iters')
        if not self.rel_tolerance > 0:
            raise InvalidConfigError("rel_tolerance debe ser > 0", field='fixed_point.rel_tolerance')
        if not self.sigma_floor > 0:
            raise InvalidConfigError("sigma_floor debe ser > 0", field='fixed_point.sigma_floor')

    def floor_for(self, pivot):
        """Piso de dispersión efectivo para un pivote (escalar o vector)."""
        return self.sigma_floor * (1.0 + np.abs(pivot))
