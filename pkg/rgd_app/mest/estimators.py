# rgd_app/mest/estimators.py
"""
Estimadores M de localización y dispersión por iteración de punto fijo.

Las rutinas trabajan por columnas: una matriz n×d se resuelve de una vez,
cada columna de forma independiente. Las columnas que no convergen en
max_iters (u oscilan) se resuelven por Brent sobre la ecuación monótona.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from rgd_app.errors import InvalidInputError
from rgd_app.logger_config import get_logger
from rgd_app.mest.functions import ChiFunction, FixedPointSettings, RhoFunction

logger = get_logger('mest.estimators')

# Iteraciones consecutivas sin mejora del residuo antes de recurrir a Brent
STALL_LIMIT = 5


@dataclass
class FixedPointResult:
    """
    Resultado por columnas de una iteración de punto fijo.

    converged indica si la estimación final cumple la tolerancia del residuo;
    fallback marca las columnas resueltas por Brent.
    """

    estimate: np.ndarray
    converged: np.ndarray
    fallback: np.ndarray
    iterations: int

    @property
    def any_fallback(self) -> bool:
        return bool(self.fallback.any())


def _as_matrix(data, name='data'):
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidInputError(f"{name} debe ser un vector o una matriz, recibido ndim={x.ndim}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidInputError(f"{name} está vacío")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} contiene valores no finitos")
    return x


def _as_columns(value, d, name):
    v = np.broadcast_to(np.asarray(value, dtype=float), (d,)).copy()
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} contiene valores no finitos")
    return v


def _location_root(column, scale, rho, tol):
    """Raíz de Σψ((x−θ)/s) = 0 por Brent en [min, max], con paso mínimo tol·s."""
    lo, hi = float(column.min()), float(column.max())
    if hi <= lo:
        return lo

    def f(theta):
        return float(np.sum(rho.psi((column - theta) / scale)))

    f_lo, f_hi = f(lo), f(hi)
    if f_lo <= 0.0:
        return lo
    if f_hi >= 0.0:
        return hi
    return optimize.brentq(f, lo, hi, xtol=tol * scale, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_location(data, scales, rho: RhoFunction, fp: FixedPointSettings, start=None) -> FixedPointResult:
    """
    Resuelve θ̂_j = argmin_θ Σ_i ρ((x_ij − θ)/s_j) para cada columna.

    Usa la actualización θ ← θ + (s/n)·Σψ((x − θ)/s) partiendo de la mediana.

    Args:
        data: Matriz n×d (o vector de n valores)
        scales: Escala s_j > 0 por columna (o escalar)
        rho: Función ρ
        fp: Parámetros de punto fijo
        start: Valor inicial opcional por columna

    Returns:
        FixedPointResult: Estimaciones, máscara de convergencia y de respaldo
    """
    x = _as_matrix(data)
    n, d = x.shape
    s = _as_columns(scales, d, 'scales')
    if not np.all(s > 0):
        raise InvalidInputError("La escala s debe ser positiva")

    lo = x.min(axis=0)
    hi = x.max(axis=0)
    theta = np.median(x, axis=0) if start is None else _as_columns(start, d, 'start')
    theta = np.clip(theta, lo, hi)

    tol = fp.rel_tolerance * n
    active = np.ones(d, dtype=bool)
    converged = np.zeros(d, dtype=bool)
    stalls = np.zeros(d, dtype=int)
    previous = np.full(d, np.inf)
    iterations = 0

    for iterations in range(1, int(fp.max_iters) + 1):
        residual = np.sum(rho.psi((x - theta) / s), axis=0)
        magnitude = np.abs(residual)
        theta = np.where(active, np.clip(theta + (s / n) * residual, lo, hi), theta)

        done = active & (magnitude <= tol)
        stalls = np.where(magnitude >= previous, stalls + 1, 0)
        previous = magnitude
        converged |= done
        active &= ~done & (stalls < STALL_LIMIT)
        if not active.any():
            break

    fallback = ~converged
    for j in np.flatnonzero(fallback):
        theta[j] = _location_root(x[:, j], s[j], rho, fp.rel_tolerance)
        logger.debug(f"Localización: columna {j} resuelta por Brent tras {iterations} iteraciones")

    if fallback.any():
        final = np.abs(np.sum(rho.psi((x[:, fallback] - theta[fallback]) / s[fallback]), axis=0))
        converged[fallback] = (final <= tol) | (lo[fallback] == hi[fallback])

    return FixedPointResult(estimate=theta, converged=converged,
                            fallback=fallback, iterations=iterations)


def _dispersion_root(residuals, floor, chi):
    """Raíz de Σχ(r/σ) = 0 en [piso, cota superior] por Brent."""
    def f(sigma):
        return float(np.sum(chi.chi(residuals / sigma)))

    upper = max(float(np.max(np.abs(residuals))) * 1e3, floor * 10.0)
    if f(upper) >= 0.0:
        return upper
    return optimize.brentq(f, floor, upper, xtol=floor, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_dispersion(data, pivots, chi: ChiFunction, fp: FixedPointSettings, start=None) -> FixedPointResult:
    """
    Resuelve σ̂_j > 0 tal que Σ_i χ((x_ij − γ_j)/σ̂_j) = 0 para cada columna.

    Usa la iteración σ ← σ·(1 − Σχ(r/σ)/(χ(0)·n))^{1/2}. Si la dispersión de la
    columna está por debajo del piso (no existe raíz ≥ piso) devuelve el piso.

    Args:
        data: Matriz n×d (o vector)
        pivots: Pivote γ_j por columna (o escalar)
        chi: Función χ
        fp: Parámetros de punto fijo
        start: Valor inicial opcional por columna (> 0)

    Returns:
        FixedPointResult: Estimaciones σ̂ y diagnósticos
    """
    x = _as_matrix(data)
    n, d = x.shape
    gamma = _as_columns(pivots, d, 'pivots')
    r = x - gamma
    floor = fp.floor_for(gamma)

    # Sin raíz por encima del piso: Σχ(r/piso) ≤ 0
    degenerate = np.sum(chi.chi(r / floor), axis=0) <= 0.0

    if start is None:
        sigma = np.sqrt(np.mean(r * r, axis=0))
    else:
        sigma = _as_columns(start, d, 'start')
        if not np.all(sigma > 0):
            raise InvalidInputError("El valor inicial de σ debe ser positivo")
    sigma = np.maximum(sigma, floor)

    tol = fp.rel_tolerance * n
    active = ~degenerate
    converged = degenerate.copy()
    stalls = np.zeros(d, dtype=int)
    previous = np.full(d, np.inf)
    iterations = 0

    if active.any():
        for iterations in range(1, int(fp.max_iters) + 1):
            total = np.sum(chi.chi(r / sigma), axis=0)
            magnitude = np.abs(total)
            factor = np.maximum(1.0 - total / (chi.at_zero * n), 0.0)
            sigma = np.where(active, np.maximum(sigma * np.sqrt(factor), floor), sigma)

            done = active & (magnitude <= tol)
            stalls = np.where(magnitude >= previous, stalls + 1, 0)
            previous = magnitude
            converged |= done
            active &= ~done & (stalls < STALL_LIMIT)
            if not active.any():
                break

    sigma = np.where(degenerate, floor, sigma)
    fallback = ~converged
    for j in np.flatnonzero(fallback):
        sigma[j] = _dispersion_root(r[:, j], floor[j], chi)
        logger.debug(f"Dispersión: columna {j} resuelta por Brent tras {iterations} iteraciones")

    if fallback.any():
        final = np.abs(np.sum(chi.chi(r[:, fallback] / sigma[fallback]), axis=0))
        converged[fallback] = final <= tol

    return FixedPointResult(estimate=sigma, converged=converged,
                            fallback=fallback, iterations=iterations)


def confidence_scale(sigma_hat, n, delta):
    """
    Ajusta la dispersión al tamaño muestral y la confianza: s = σ̂·√(n / log(2/δ)).

    Args:
        sigma_hat: Dispersión estimada (> 0), escalar o vector
        n (int): Tamaño muestral (≥ 1)
        delta (float): Nivel de confianza δ en (0, 1)

    Returns:
        Escala s (mismo tipo que sigma_hat)
    """
    if int(n) < 1:
        raise InvalidInputError(f"n debe ser ≥ 1, recibido {n}")
    if not 0.0 < float(delta) < 1.0:
        raise InvalidInputError(f"delta debe estar en (0, 1), recibido {delta}")
    sigma = np.asarray(sigma_hat, dtype=float)
    if not np.all(sigma > 0):
        raise InvalidInputError("sigma_hat debe ser positivo")
    scale = sigma * math.sqrt(int(n) / math.log(2.0 / float(delta)))
    return float(scale) if scale.ndim == 0 else scale


def locate(data, s, rho: RhoFunction, fp: FixedPointSettings = None) -> float:
    """
    Estimación M de localización de una muestra unidimensional.

    Args:
        data: Vector de n valores finitos
        s (float): Escala positiva
        rho: Función ρ
        fp: Parámetros de punto fijo (por defecto los de FixedPointSettings())

    Returns:
        float: θ̂, contenido en [min(data), max(data)]
    """
    x = np.asarray(data, dtype=float).ravel()
    if not float(s) > 0:
        raise InvalidInputError(f"La escala s debe ser positiva, recibido {s}")
    result = solve_location(x, float(s), rho, fp or FixedPointSettings())
    return float(result.estimate[0])


def rescale(data, pivot, chi: ChiFunction, fp: FixedPointSettings = None, start=None) -> float:
    """
    Estimación M de dispersión de una muestra unidimensional alrededor de un pivote.

    Args:
        data: Vector de n valores finitos
        pivot (float): Pivote γ finito
        chi: Función χ
        fp: Parámetros de punto fijo
        start (float): Valor inicial opcional de la iteración

    Returns:
        float: σ̂ ≥ piso
    """
    x = np.asarray(data, dtype=float).ravel()
    if not math.isfinite(float(pivot)):
        raise InvalidInputError("El pivote debe ser finito")
    result = solve_dispersion(x, float(pivot), chi, fp or FixedPointSettings(), start=start)
    return float(result.estimate[0])


def psi_eval(u, rho: RhoFunction) -> float:
    """Evalúa ψ(u) para un escalar finito."""
    if not math.isfinite(float(u)):
        raise InvalidInputError("u debe ser finito")
    return float(rho.psi(float(u)))


def chi_eval(u, chi: ChiFunction) -> float:
    """Evalúa χ(u) para un escalar finito."""
    if not math.isfinite(float(u)):
        raise InvalidInputError("u debe ser finito")
    return float(chi.chi(float(u)))
